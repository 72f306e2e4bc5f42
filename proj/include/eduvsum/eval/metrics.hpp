#pragma once

#include <span>
#include <vector>

#include "eduvsum/core/types.hpp"
#include "eduvsum/model/fusion_model.hpp"

namespace eduvsum::eval {

using model::PredictionDistribution;

// Percentage of frames whose true class (0..9) is among the k most probable;
// equal probabilities rank the lower class first. k in {1, 2, 3}.
double top_k_accuracy(std::span<const PredictionDistribution> predictions, std::span<const int> labels, int k);

// Mean |predicted score - annotated score of the frame's segment| over frames.
// Throws Contract when a frame points outside the annotated segments.
double mae_frame(std::span<const int> predicted_scores, const AnnotationSet& annotation,
                 std::span<const int> frame_segments);

struct SegmentScores {
    std::vector<double> values;
    // Segments with no frames; each copies its predecessor (or, for a leading
    // run, the first populated segment).
    std::vector<int> inherited;
};

SegmentScores aggregate_segment_scores(std::span<const int> predicted_scores, std::span<const int> frame_segments,
                                       int segment_count);

double mae_segment(std::span<const double> segment_predictions, std::span<const int> annotated_scores);

}  // namespace eduvsum::eval
