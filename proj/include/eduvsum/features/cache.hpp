#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "eduvsum/core/types.hpp"
#include "eduvsum/features/audio_features.hpp"
#include "eduvsum/features/backend.hpp"
#include "eduvsum/features/bundle.hpp"

namespace eduvsum::features {

struct FeatureConfig {
    BackendSpec visual = make_backend_spec(Modality::Visual, "vgg16");
    BackendSpec audio = make_backend_spec(Modality::Audio, "shortterm34");
    BackendSpec text = make_backend_spec(Modality::Text, "bert-base");
    double sample_rate = 3.0;  // sampled frames per second
    double segment_length = kSegmentSeconds;
    double audio_window = kDefaultAudioWindow;
    double audio_step = kDefaultAudioStep;
    int audio_rate = ingest::kDefaultAudioRate;
    std::uint64_t stub_seed = 0;

    nlohmann::json to_json() const;
    // Stable 16-hex-digit digest of every field above.
    std::string fingerprint() const;
};

// Layout: <cache_dir>/<video_id>/<name>.<fingerprint>.bin plus a .json sidecar
// (dims, dtype, fingerprint, CRC-32) for name in {visual, audio, text}, and
// frames.<fingerprint>.json for timestamps and segment indices.
void cache_features(const FeatureBundle& bundle, const std::string& fingerprint,
                    const std::filesystem::path& cache_dir);

// nullopt on any miss: absent files, other fingerprint, checksum or shape
// mismatch. Corruption is logged, never reused.
std::optional<FeatureBundle> load_cached(const std::string& video_id, const std::string& fingerprint,
                                         const std::filesystem::path& cache_dir);

std::uint32_t crc32_of(const void* data, std::size_t size);

}  // namespace eduvsum::features
