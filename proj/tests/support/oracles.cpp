#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <stdexcept>

namespace eduvsum::oracles {

double top_k(const std::vector<Probs>& probs, const std::vector<int>& labels, int k) {
    int hits = 0;
    for (std::size_t f = 0; f < probs.size(); ++f) {
        std::vector<int> order(10);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return probs[f][a] > probs[f][b]; });
        if (std::find(order.begin(), order.begin() + k, labels[f]) != order.begin() + k) ++hits;
    }
    return 100.0 * hits / static_cast<double>(probs.size());
}

double mae_frame(const std::vector<int>& predicted, const std::vector<int>& segment_scores,
                 const std::vector<int>& frame_segments) {
    double total = 0.0;
    for (std::size_t f = 0; f < predicted.size(); ++f) {
        total += std::abs(predicted[f] - segment_scores.at(frame_segments[f]));
    }
    return total / static_cast<double>(predicted.size());
}

std::vector<double> segment_means(const std::vector<int>& predicted, const std::vector<int>& frame_segments,
                                  int segment_count) {
    std::map<int, std::vector<int>> groups;
    for (std::size_t f = 0; f < predicted.size(); ++f) groups[frame_segments[f]].push_back(predicted[f]);
    if (groups.empty()) throw std::runtime_error("no frames");
    std::vector<double> out(segment_count, 0.0);
    for (int s = 0; s < segment_count; ++s) {
        auto it = groups.find(s);
        if (it != groups.end()) {
            double sum = 0.0;
            for (int v : it->second) sum += v;
            out[s] = sum / static_cast<double>(it->second.size());
        } else if (s > 0) {
            out[s] = out[s - 1];
        }
    }
    // Leading empty segments: fill backwards from the first populated one.
    const int first = groups.begin()->first;
    for (int s = 0; s < first; ++s) out[s] = out[first];
    return out;
}

double mae_segment(const std::vector<double>& predicted, const std::vector<int>& scores) {
    double total = 0.0;
    for (std::size_t s = 0; s < predicted.size(); ++s) total += std::abs(predicted[s] - scores[s]);
    return total / static_cast<double>(predicted.size());
}

MetricInstance random_metric_instance(std::mt19937_64& rng, int max_frames, int max_segments) {
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    MetricInstance m;
    const int frames = uni(1, max_frames);
    m.segment_count = uni(1, max_segments);
    for (int f = 0; f < frames; ++f) m.frame_segments.push_back(uni(0, m.segment_count - 1));
    std::sort(m.frame_segments.begin(), m.frame_segments.end());
    for (int s = 0; s < m.segment_count; ++s) m.segment_scores.push_back(uni(1, 10));
    const bool quantised = uni(0, 2) == 0;
    for (int f = 0; f < frames; ++f) {
        Probs p{};
        double sum = 0.0;
        for (double& v : p) {
            v = quantised ? uni(0, 3) : std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            sum += v;
        }
        if (sum == 0.0) {
            p.fill(0.1);
            sum = 1.0;
        }
        for (double& v : p) v /= sum;
        m.probs.push_back(p);
        m.labels.push_back(uni(0, 9));
        m.predicted.push_back(uni(1, 10));
    }
    return m;
}

model::Batch random_batch(const model::ModelConfig& config, int batch, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    model::Batch b;
    for (int m = 0; m < 3; ++m) {
        if (!config.modalities.contains(static_cast<features::Modality>(m))) continue;
        for (int k = 0; k <= config.history; ++k) {
            model::Mat x(batch, config.input_dims[m]);
            for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);
            b.inputs[m].push_back(std::move(x));
        }
    }
    return b;
}

GradCheckResult gradient_check(const model::FusionModel& model, const model::Batch& batch,
                               const std::vector<int>& labels, std::optional<std::uint64_t> dropout_seed,
                               double step) {
    auto eval = [&](const model::FusionModel& m, std::vector<model::Mat>* grads) {
        if (!dropout_seed) return m.loss(batch, labels, grads, nullptr);
        Rng rng(*dropout_seed);
        return m.loss(batch, labels, grads, &rng);
    };
    std::vector<model::Mat> analytic;
    const double base = eval(model, &analytic);

    model::FusionModel probe = model;
    GradCheckResult result;
    auto& params = probe.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
        model::Mat& w = params[p].value;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double saved = w.data()[i];
            const double a = analytic[p].data()[i];
            // A ReLU corner inside [x - h, x + h] spoils the quotient; shrinking h
            // moves the corner outside. A wrong gradient does not improve this way.
            double best = -1.0;
            bool refined = false;
            for (double h = step; h >= step * 1e-2; h /= 10.0) {
                w.data()[i] = saved + h;
                const double up = eval(probe, nullptr);
                w.data()[i] = saved - h;
                const double down = eval(probe, nullptr);
                w.data()[i] = saved;
                const double right = (up - base) / h, left = (base - down) / h;
                // Smooth curvature moves the one-sided slopes apart by O(h) only.
                const bool corner = std::abs(right - left) > std::max(10.0 * h, 0.1 * (std::abs(right) + std::abs(left)));
                if (!corner) {
                    const double numeric = (up - down) / (2.0 * h);
                    const double scale = std::abs(a) + std::abs(numeric);
                    // Entries this small are at the noise floor of the difference quotient.
                    const double err = scale < 1e-7 ? 0.0 : std::abs(a - numeric) / scale;
                    best = best < 0.0 ? err : std::min(best, err);
                    if (err <= 1e-4) break;
                }
                refined = true;
            }
            ++result.entries;
            if (refined) ++result.kinks;
            // Still straddling a corner at the smallest step: nothing to compare.
            if (best >= 0.0) result.max_relative_error = std::max(result.max_relative_error, best);
        }
    }
    return result;
}

long long hand_parameter_count(const model::ModalitySet& s) {
    // Worked by hand: a 64-unit BiLSTM over d inputs holds 512 (d + 65) weights;
    // the dense head holds 4128 + 528 + 170 = 4826.
    const std::string key = s.to_string();
    if (key == "v") return 2'234'074;
    if (key == "a") return 171'738;
    if (key == "t") return 530'138;
    if (key == "v,a") return 2'367'706;
    if (key == "v,t") return 2'726'106;
    if (key == "a,t") return 663'770;
    if (key == "v,a,t") return 2'859'738;
    return -1;
}

}  // namespace eduvsum::oracles
