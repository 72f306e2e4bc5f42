#include "eduvsum/eval/metrics.hpp"

#include <cmath>
#include <string>

#include "eduvsum/core/errors.hpp"

namespace eduvsum::eval {

namespace {

void same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        fail(ErrorKind::InvalidInput, std::string(what) + ": lengths differ (" + std::to_string(a) + " vs " +
                                          std::to_string(b) + ")");
    }
}

}  // namespace

double top_k_accuracy(std::span<const PredictionDistribution> predictions, std::span<const int> labels, int k) {
    same_length(predictions.size(), labels.size(), "top_k_accuracy");
    if (k < 1 || k > 3) fail(ErrorKind::InvalidInput, "k must be 1, 2 or 3");
    if (predictions.empty()) fail(ErrorKind::InvalidInput, "top_k_accuracy: no frames");
    long long hits = 0;
    for (std::size_t n = 0; n < predictions.size(); ++n) {
        const int y = labels[n];
        if (y < 0 || y >= model::kClasses) fail(ErrorKind::InvalidInput, "label out of range");
        const auto& p = predictions[n].probs;
        // Rank of y: classes strictly more probable, plus equal ones with a lower index.
        int rank = 0;
        for (int c = 0; c < model::kClasses; ++c) {
            if (p[c] > p[y] || (p[c] == p[y] && c < y)) ++rank;
        }
        if (rank < k) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double mae_frame(std::span<const int> predicted_scores, const AnnotationSet& annotation,
                 std::span<const int> frame_segments) {
    same_length(predicted_scores.size(), frame_segments.size(), "mae_frame");
    if (predicted_scores.empty()) fail(ErrorKind::InvalidInput, "mae_frame: no frames");
    long long total = 0;
    for (std::size_t n = 0; n < predicted_scores.size(); ++n) {
        const int seg = frame_segments[n];
        if (seg < 0 || seg >= static_cast<int>(annotation.scores.size())) {
            fail(ErrorKind::Contract, "frame " + std::to_string(n) + " lies outside the annotated segments");
        }
        total += std::abs(predicted_scores[n] - annotation.scores[seg]);
    }
    return static_cast<double>(total) / static_cast<double>(predicted_scores.size());
}

SegmentScores aggregate_segment_scores(std::span<const int> predicted_scores, std::span<const int> frame_segments,
                                       int segment_count) {
    same_length(predicted_scores.size(), frame_segments.size(), "aggregate_segment_scores");
    if (segment_count <= 0) fail(ErrorKind::InvalidInput, "segment count must be positive");
    std::vector<long long> sum(segment_count, 0);
    std::vector<int> count(segment_count, 0);
    for (std::size_t n = 0; n < predicted_scores.size(); ++n) {
        const int seg = frame_segments[n];
        if (seg < 0 || seg >= segment_count) {
            fail(ErrorKind::Contract, "frame " + std::to_string(n) + " lies outside the segment layout");
        }
        sum[seg] += predicted_scores[n];
        ++count[seg];
    }
    int first = -1;
    for (int s = 0; s < segment_count && first < 0; ++s)
        if (count[s] > 0) first = s;
    if (first < 0) fail(ErrorKind::InvalidInput, "aggregate_segment_scores: no frames");

    SegmentScores out;
    out.values.resize(segment_count);
    for (int s = 0; s < segment_count; ++s) {
        if (count[s] > 0) {
            out.values[s] = static_cast<double>(sum[s]) / count[s];
        } else {
            out.values[s] = s < first ? static_cast<double>(sum[first]) / count[first] : out.values[s - 1];
            out.inherited.push_back(s);
        }
    }
    return out;
}

double mae_segment(std::span<const double> segment_predictions, std::span<const int> annotated_scores) {
    same_length(segment_predictions.size(), annotated_scores.size(), "mae_segment");
    if (segment_predictions.empty()) fail(ErrorKind::InvalidInput, "mae_segment: no segments");
    double total = 0.0;
    for (std::size_t s = 0; s < segment_predictions.size(); ++s) {
        total += std::abs(segment_predictions[s] - annotated_scores[s]);
    }
    return total / static_cast<double>(segment_predictions.size());
}

}  // namespace eduvsum::eval
