#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eduvsum/features/backend.hpp"

namespace eduvsum::features {

struct WordVector {
    std::string word;
    double timestamp = 0.0;
    Eigen::VectorXf vector;
};

// Interval owned by frame k: (t[k-1], t[k]]; the first frame owns (-inf, t[0]].
// Both alignment rules below aggregate over these intervals.

// Row k is the mean of the short-term rows whose window centre
// (i * step + window / 2) falls into frame k's interval, or the row with the
// nearest centre when none does. Returns nullopt for an empty input.
std::optional<FeatureMatrix> align_audio_to_frames(const FeatureMatrix& short_term, double window, double step,
                                                   std::span<const double> frame_timestamps);

// Row k is the mean of the vectors of words timed inside frame k's interval,
// zero when no word is.
FeatureMatrix align_text_to_frames(std::span<const WordVector> words, std::span<const double> frame_timestamps,
                                   int dim);

}  // namespace eduvsum::features
