#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "eduvsum/features/bundle.hpp"
#include "eduvsum/model/config.hpp"

namespace eduvsum::model {

struct WindowedExample {
    // (h+1) x d_m, oldest frame first; nullopt for modalities not requested.
    std::array<std::optional<Eigen::MatrixXd>, 3> inputs;
    int label = 0;
    int frame = 0;
};

// Frame indices feeding the example at t: (t-h ... t), clamped at frame 0.
std::vector<int> window_frames(int t, int history);

// One example per frame. Labels are classes 0..9; throws InvalidInput when
// their count differs from the frame count or one is out of range.
std::vector<WindowedExample> build_windows(const features::FeatureBundle& bundle, std::span<const int> labels,
                                           int history, const ModalitySet& modalities = {});

// Score 1..10 to class 0..9 and back.
int score_to_class(int score);
int class_to_score(int cls);

// Per-frame classes from per-segment scores.
std::vector<int> frame_labels(const features::FeatureBundle& bundle, std::span<const int> segment_scores);

}  // namespace eduvsum::model
