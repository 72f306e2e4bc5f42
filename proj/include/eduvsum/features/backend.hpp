#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace eduvsum::features {

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Modality { Visual, Audio, Text };

const char* to_string(Modality m);

struct ModalitySet {
    bool visual = true;
    bool audio = true;
    bool text = true;

    int count() const { return int(visual) + int(audio) + int(text); }
    bool contains(Modality m) const;
    bool includes(const ModalitySet& other) const;
    // "v,a,t" style; order is always v, a, t.
    std::string to_string() const;
    static ModalitySet parse(std::string_view spec);

    bool operator==(const ModalitySet&) const = default;
};

// Backend names and their fixed output widths:
//   visual: vgg16 4096, resnet50 / inceptionv3 / xception 2048, stub (configurable)
//   audio:  shortterm34 68, stub (configurable)
//   text:   bert-base 768, stub (configurable)
struct BackendSpec {
    Modality modality = Modality::Visual;
    std::string name;
    int output_dim = 0;

    bool is_stub() const { return name == "stub"; }
    bool operator==(const BackendSpec&) const = default;
};

std::optional<int> canonical_dim(Modality modality, std::string_view name);

// Throws InvalidConfig for unknown names or a non-positive stub width.
BackendSpec make_backend_spec(Modality modality, std::string_view name, int stub_dim = 8);

inline constexpr int kAudioBaseFeatures = 34;
inline constexpr int kAudioFeatureDim = 2 * kAudioBaseFeatures;
inline constexpr int kTextFeatureDim = 768;

}  // namespace eduvsum::features
