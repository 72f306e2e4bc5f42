#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>

#include <Eigen/Core>

#include "eduvsum/features/backend.hpp"
#include "eduvsum/ingest/media.hpp"

namespace eduvsum::features {

class VisualEncoder {
public:
    virtual ~VisualEncoder() = default;
    virtual const BackendSpec& spec() const = 0;
    // Deterministic for identical pixels. Thread-safe.
    virtual Eigen::VectorXf encode(const ingest::RgbImage& image) const = 0;
};

struct VisualBackendOptions {
    // Directory holding <backbone>.onnx; each network ends at its penultimate
    // (pre-classifier) layer and takes NCHW input.
    std::filesystem::path weights_dir = "models";
    std::uint64_t stub_seed = 0;
};

// Stub: features are a seeded hash of the pixel checksum. Real backbones load
// ONNX weights through OpenCV DNN; missing weights or an output width other
// than the canonical one raise BackendLoad.
std::unique_ptr<VisualEncoder> make_visual_encoder(const BackendSpec& spec, const VisualBackendOptions& options);

FeatureMatrix extract_visual(std::span<const ingest::SampledFrame> frames, const VisualEncoder& encoder);

// Values in [-1, 1) derived from `key`; shared by the stub backends.
Eigen::VectorXf hashed_vector(std::uint64_t key, int dim);

}  // namespace eduvsum::features
