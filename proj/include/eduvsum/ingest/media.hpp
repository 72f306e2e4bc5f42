#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "eduvsum/core/types.hpp"

namespace eduvsum::ingest {

// Packed 8-bit RGB raster, row-major.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3

    std::uint8_t at(int x, int y, int channel) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
    }
    bool empty() const { return pixels.empty(); }
};

struct SampledFrame {
    int frame_index = 0;     // position in the sampled sequence
    double timestamp = 0.0;  // presentation time of the chosen native frame
    RgbImage image;
    int segment_index = 0;
};

struct MediaInfo {
    double duration = 0.0;
    double native_fps = 0.0;
    bool has_audio = false;
    int width = 0;
    int height = 0;
};

struct AudioTrack {
    std::vector<float> samples;  // mono
    int sample_rate = 16000;

    double duration() const { return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0; }
};

inline constexpr int kDefaultAudioRate = 16000;

// Throws Decode on unreadable containers or files without a video stream.
MediaInfo probe_video(const std::filesystem::path& media_path);

// Streams frames nearest to the ideal times k / sample_rate, decoding lazily.
class FrameSampler {
public:
    FrameSampler(const std::filesystem::path& media_path, double sample_rate,
                 double segment_length = kSegmentSeconds);
    ~FrameSampler();
    FrameSampler(FrameSampler&&) noexcept;
    FrameSampler& operator=(FrameSampler&&) noexcept;

    std::optional<SampledFrame> next();
    const MediaInfo& info() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::vector<SampledFrame> sample_frames(const std::filesystem::path& media_path, double sample_rate,
                                        double segment_length = kSegmentSeconds);

// Decodes the first audio stream, resamples to `target_rate` and averages the
// channels into mono. Returns nullopt when the file has no audio stream.
std::optional<AudioTrack> extract_audio(const std::filesystem::path& media_path,
                                        int target_rate = kDefaultAudioRate);

}  // namespace eduvsum::ingest
