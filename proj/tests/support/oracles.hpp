#pragma once

// Deliberately naive reference implementations. They share no code with the
// library and favour obviousness over speed.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "eduvsum/model/config.hpp"
#include "eduvsum/model/fusion_model.hpp"

namespace eduvsum::oracles {

using Probs = std::array<double, 10>;

// Sorts class indices by (probability desc, index asc) and looks for the label.
double top_k(const std::vector<Probs>& probs, const std::vector<int>& labels, int k);

double mae_frame(const std::vector<int>& predicted, const std::vector<int>& segment_scores,
                 const std::vector<int>& frame_segments);

// Group-by-mean; empty segments copy the previous value, a leading empty run
// copies the first populated segment.
std::vector<double> segment_means(const std::vector<int>& predicted, const std::vector<int>& frame_segments,
                                  int segment_count);

double mae_segment(const std::vector<double>& predicted, const std::vector<int>& scores);

struct MetricInstance {
    std::vector<Probs> probs;
    std::vector<int> labels;           // classes 0..9
    std::vector<int> predicted;        // scores 1..10
    std::vector<int> frame_segments;   // non-decreasing
    std::vector<int> segment_scores;   // one per segment
    int segment_count = 0;
};

// T in [1, max_frames], segments in [1, max_segments]. Probabilities are
// sometimes quantised so ties occur.
MetricInstance random_metric_instance(std::mt19937_64& rng, int max_frames = 500, int max_segments = 100);

// Standard-normal inputs for every enabled modality, (h+1) steps of B x d.
model::Batch random_batch(const model::ModelConfig& config, int batch, std::mt19937_64& rng);

struct GradCheckResult {
    double max_relative_error = 0.0;
    long long entries = 0;
    long long kinks = 0;  // entries that needed a smaller step to clear a ReLU corner
};

// Compares FusionModel::loss gradients with central differences for every
// parameter entry, retrying at h/10 and h/100 when the first estimate is off
// or the one-sided slopes disagree. With a dropout seed, each evaluation uses
// a fresh Rng with that seed so the masks are the same on both sides.
GradCheckResult gradient_check(const model::FusionModel& model, const model::Batch& batch,
                               const std::vector<int>& labels, std::optional<std::uint64_t> dropout_seed = {},
                               double step = 1e-5);

// Hand-computed parameter totals at the default widths (4096, 68, 768) and 64 units.
long long hand_parameter_count(const model::ModalitySet& modalities);

}  // namespace eduvsum::oracles
