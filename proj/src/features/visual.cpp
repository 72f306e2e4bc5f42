#include "eduvsum/features/visual.hpp"

#include <mutex>

#include <opencv2/dnn.hpp>
#include <opencv2/imgproc.hpp>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/rng.hpp"

namespace eduvsum::features {

Eigen::VectorXf hashed_vector(std::uint64_t key, int dim) {
    Eigen::VectorXf v(dim);
    for (int i = 0; i < dim; ++i) {
        const std::uint64_t h = splitmix64(key + 0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(i + 1));
        v[i] = static_cast<float>(static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0);
    }
    return v;
}

namespace {

void check_rgb(const ingest::RgbImage& image) {
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
        fail(ErrorKind::InvalidInput, "expected a packed 8-bit RGB raster");
    }
}

class StubVisualEncoder final : public VisualEncoder {
public:
    StubVisualEncoder(BackendSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {}

    const BackendSpec& spec() const override { return spec_; }

    Eigen::VectorXf encode(const ingest::RgbImage& image) const override {
        check_rgb(image);
        const std::uint64_t checksum = fnv1a64(std::span<const std::uint8_t>(image.pixels), splitmix64(seed_));
        return hashed_vector(checksum, spec_.output_dim);
    }

private:
    BackendSpec spec_;
    std::uint64_t seed_;
};

struct Preprocessing {
    int size;
    double scale;
    cv::Scalar mean;
    bool to_bgr;
};

// Canonical ImageNet preprocessing of each backbone family.
Preprocessing preprocessing_for(const std::string& name) {
    if (name == "vgg16" || name == "resnet50") {
        return {224, 1.0, cv::Scalar(103.939, 116.779, 123.68), true};
    }
    return {299, 1.0 / 127.5, cv::Scalar(127.5, 127.5, 127.5), false};
}

class DnnVisualEncoder final : public VisualEncoder {
public:
    DnnVisualEncoder(BackendSpec spec, const std::filesystem::path& weights_dir)
        : spec_(std::move(spec)), prep_(preprocessing_for(spec_.name)) {
        const auto path = weights_dir / (spec_.name + ".onnx");
        if (!std::filesystem::exists(path)) {
            fail(ErrorKind::BackendLoad, "weights for " + spec_.name + " not found at " + path.string());
        }
        try {
            net_ = cv::dnn::readNetFromONNX(path.string());
        } catch (const cv::Exception& e) {
            fail(ErrorKind::BackendLoad, "cannot load " + path.string() + ": " + e.what());
        }
        if (net_.empty()) fail(ErrorKind::BackendLoad, "empty network in " + path.string());
        ingest::RgbImage probe{prep_.size, prep_.size,
                               std::vector<std::uint8_t>(static_cast<std::size_t>(prep_.size) * prep_.size * 3, 0)};
        const auto out = run(probe);
        if (out.size() != spec_.output_dim) {
            fail(ErrorKind::BackendLoad, spec_.name + " produced " + std::to_string(out.size()) +
                                             " features, expected " + std::to_string(spec_.output_dim));
        }
    }

    const BackendSpec& spec() const override { return spec_; }

    Eigen::VectorXf encode(const ingest::RgbImage& image) const override {
        check_rgb(image);
        return run(image);
    }

private:
    Eigen::VectorXf run(const ingest::RgbImage& image) const {
        cv::Mat rgb(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.pixels.data()));
        cv::Mat input;
        if (prep_.to_bgr) cv::cvtColor(rgb, input, cv::COLOR_RGB2BGR);
        else input = rgb;
        cv::Mat blob = cv::dnn::blobFromImage(input, prep_.scale, cv::Size(prep_.size, prep_.size), prep_.mean,
                                              /*swapRB=*/false, /*crop=*/false, CV_32F);
        cv::Mat out;
        {
            std::lock_guard lock(mutex_);
            net_.setInput(blob);
            out = net_.forward().clone();
        }
        out = out.reshape(1, 1);
        Eigen::VectorXf v(out.cols);
        for (int i = 0; i < out.cols; ++i) v[i] = out.at<float>(0, i);
        return v;
    }

    BackendSpec spec_;
    Preprocessing prep_;
    mutable cv::dnn::Net net_;
    mutable std::mutex mutex_;
};

}  // namespace

std::unique_ptr<VisualEncoder> make_visual_encoder(const BackendSpec& spec, const VisualBackendOptions& options) {
    if (spec.modality != Modality::Visual) fail(ErrorKind::InvalidConfig, "not a visual backend: " + spec.name);
    if (spec.is_stub()) return std::make_unique<StubVisualEncoder>(spec, options.stub_seed);
    return std::make_unique<DnnVisualEncoder>(spec, options.weights_dir);
}

FeatureMatrix extract_visual(std::span<const ingest::SampledFrame> frames, const VisualEncoder& encoder) {
    if (frames.empty()) fail(ErrorKind::InvalidInput, "no frames to encode");
    const int dim = encoder.spec().output_dim;
    FeatureMatrix out(static_cast<Eigen::Index>(frames.size()), dim);
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const Eigen::VectorXf row = encoder.encode(frames[t].image);
        if (row.size() != dim) fail(ErrorKind::Contract, "visual encoder returned a row of the wrong width");
        out.row(static_cast<Eigen::Index>(t)) = row.transpose();
    }
    return out;
}

}  // namespace eduvsum::features
