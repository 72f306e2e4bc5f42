#include "eduvsum/ingest/frame_cache.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "eduvsum/core/errors.hpp"

namespace eduvsum::ingest {

namespace {

std::filesystem::path frame_path(const std::filesystem::path& root, const std::string& video_id, int index) {
    return root / "frames" / video_id / (std::to_string(index) + ".png");
}

}  // namespace

void write_frame_cache(const std::filesystem::path& root, const std::string& video_id,
                       std::span<const SampledFrame> frames) {
    std::filesystem::create_directories(root / "frames" / video_id);
    for (const auto& f : frames) {
        cv::Mat rgb(f.image.height, f.image.width, CV_8UC3, const_cast<std::uint8_t*>(f.image.pixels.data()));
        cv::Mat bgr;
        cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
        const auto path = frame_path(root, video_id, f.frame_index);
        if (!cv::imwrite(path.string(), bgr)) fail(ErrorKind::Io, "cannot write " + path.string());
    }
}

RgbImage read_cached_frame(const std::filesystem::path& root, const std::string& video_id, int frame_index) {
    const auto path = frame_path(root, video_id, frame_index);
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) fail(ErrorKind::Io, "cannot read " + path.string());
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    RgbImage img;
    img.width = rgb.cols;
    img.height = rgb.rows;
    img.pixels.assign(rgb.data, rgb.data + rgb.total() * 3);
    return img;
}

}  // namespace eduvsum::ingest
