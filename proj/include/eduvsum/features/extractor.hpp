#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "eduvsum/core/types.hpp"
#include "eduvsum/features/bundle.hpp"
#include "eduvsum/features/cache.hpp"
#include "eduvsum/features/text.hpp"
#include "eduvsum/features/visual.hpp"

namespace eduvsum::features {

struct ExtractorOptions {
    FeatureConfig config;
    std::filesystem::path weights_dir = "models";
    std::filesystem::path text_model_dir = "models/bert-base";
    // When set, sampled frames are also written as PNGs under <root>/frames/<video_id>/.
    std::optional<std::filesystem::path> frame_cache_root;
};

// Per-video pipeline: sample frames, encode them as they stream in, decode
// and analyse audio, parse and encode subtitles, align all to the frames.
// Backends are loaded once and shared across calls; extract() is thread-safe.
class FeatureExtractor {
public:
    explicit FeatureExtractor(ExtractorOptions options);
    ~FeatureExtractor();

    FeatureBundle extract(const VideoRecord& video, const std::filesystem::path& media_root) const;

    const FeatureConfig& config() const { return options_.config; }

private:
    ExtractorOptions options_;
    std::unique_ptr<VisualEncoder> visual_;
    std::unique_ptr<TextEncoder> text_;
};

// Short-term stub rows: seeded hash of each analysis window's samples.
FeatureMatrix stub_audio_features(const ingest::AudioTrack& track, double window, double step, int dim,
                                  std::uint64_t seed);

std::filesystem::path resolve_media(const std::filesystem::path& media_root, const std::string& path);

}  // namespace eduvsum::features
