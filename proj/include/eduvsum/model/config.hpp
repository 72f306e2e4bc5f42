#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "eduvsum/features/backend.hpp"

namespace eduvsum::model {

using features::Modality;
using features::ModalitySet;

inline constexpr int kClasses = 10;
inline constexpr int kRnnUnits = 64;
inline constexpr std::array<int, 2> kDenseSizes{32, 16};

struct ModelConfig {
    std::string visual_backend = "vgg16";
    ModalitySet modalities;
    // Input widths per modality, in v, a, t order. Only enabled ones matter.
    std::array<int, 3> input_dims{4096, features::kAudioFeatureDim, features::kTextFeatureDim};
    int history = 2;
    int rnn_units = kRnnUnits;
    // Anything other than 64 recurrent units needs this set.
    bool nonpaper_units = false;
    std::array<int, 2> dense_sizes = kDenseSizes;
    int classes = kClasses;
    double dropout = 0.2;
    int epochs = 50;
    double learning_rate = 1e-3;
    int batch_size = 64;
    std::uint64_t seed = 0;

    int input_dim(Modality m) const { return input_dims[static_cast<int>(m)]; }
    // Throws InvalidConfig.
    void validate() const;

    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);

    bool operator==(const ModelConfig&) const = default;
};

// Closed form: a bidirectional layer holds 2 * 4u(d + u + 1) weights.
long long bilstm_parameter_count(int input_dim, int units);
long long expected_parameter_count(const ModelConfig& config);

}  // namespace eduvsum::model
