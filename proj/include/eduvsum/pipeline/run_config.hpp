#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "eduvsum/features/cache.hpp"
#include "eduvsum/model/config.hpp"

namespace eduvsum::pipeline {

// Everything a command needs. Defaults:
// 3 fps, 5 s segments, 64 / 32 / 16 / 10, dropout 0.2, 50 epochs, 83 / 15 split.
struct RunConfig {
    std::filesystem::path dataset = "dataset.json";
    // Relative media and subtitle paths resolve against this; defaults to the
    // dataset file's directory.
    std::optional<std::filesystem::path> media_root;
    std::filesystem::path cache = "cache";
    std::filesystem::path out = "out";

    std::string visual_backend = "vgg16";
    std::string audio_backend = "shortterm34";
    std::string text_backend = "bert-base";
    int stub_dim = 8;  // width of "stub" backends
    std::filesystem::path weights_dir = "models";
    std::filesystem::path text_model_dir = "models/bert-base";
    double sample_rate = 3.0;
    double segment_length = 5.0;
    bool save_frames = false;

    std::string modalities = "v,a,t";
    int history = 2;
    int rnn_units = model::kRnnUnits;
    bool nonpaper_units = false;
    double dropout = 0.2;
    int epochs = 50;
    double learning_rate = 1e-3;
    int batch_size = 64;
    double train_fraction = 0.847;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool round_segments = false;

    std::filesystem::path resolved_media_root() const;
    features::FeatureConfig feature_config() const;
    // Input widths come from the cached features.
    model::ModelConfig model_config(const std::array<int, 3>& input_dims) const;
    // Throws InvalidConfig.
    void validate() const;
    nlohmann::json to_json() const;
};

}  // namespace eduvsum::pipeline
