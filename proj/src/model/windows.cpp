#include "eduvsum/model/windows.hpp"

#include <algorithm>
#include <string>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/types.hpp"

namespace eduvsum::model {

std::vector<int> window_frames(int t, int history) {
    std::vector<int> out(static_cast<std::size_t>(history) + 1);
    for (int k = 0; k <= history; ++k) out[k] = std::max(0, t - history + k);
    return out;
}

std::vector<WindowedExample> build_windows(const features::FeatureBundle& bundle, std::span<const int> labels,
                                           int history, const ModalitySet& modalities) {
    const int frames = bundle.frame_count();
    if (static_cast<int>(labels.size()) != frames) {
        fail(ErrorKind::InvalidInput, bundle.video_id + ": " + std::to_string(labels.size()) + " labels for " +
                                          std::to_string(frames) + " frames");
    }
    if (history < 0) fail(ErrorKind::InvalidInput, "history window must be >= 0");
    std::vector<WindowedExample> out;
    out.reserve(frames);
    for (int t = 0; t < frames; ++t) {
        if (labels[t] < 0 || labels[t] >= kClasses) {
            fail(ErrorKind::InvalidInput, bundle.video_id + ": label out of range at frame " + std::to_string(t));
        }
        WindowedExample ex;
        ex.label = labels[t];
        ex.frame = t;
        const auto idx = window_frames(t, history);
        for (Modality m : {Modality::Visual, Modality::Audio, Modality::Text}) {
            if (!modalities.contains(m)) continue;
            const auto& src = bundle.matrix(m);
            Eigen::MatrixXd seq(history + 1, src.cols());
            for (int k = 0; k <= history; ++k) seq.row(k) = src.row(idx[k]).cast<double>();
            ex.inputs[static_cast<int>(m)] = std::move(seq);
        }
        out.push_back(std::move(ex));
    }
    return out;
}

int score_to_class(int score) {
    if (score < kMinScore || score > kMaxScore) fail(ErrorKind::InvalidInput, "score out of range: " + std::to_string(score));
    return score - 1;
}

int class_to_score(int cls) { return cls + 1; }

std::vector<int> frame_labels(const features::FeatureBundle& bundle, std::span<const int> segment_scores) {
    std::vector<int> out;
    out.reserve(bundle.segment_index.size());
    for (int seg : bundle.segment_index) {
        if (seg < 0 || seg >= static_cast<int>(segment_scores.size())) {
            fail(ErrorKind::Contract, bundle.video_id + ": frame in segment " + std::to_string(seg) +
                                          " has no annotation");
        }
        out.push_back(score_to_class(segment_scores[seg]));
    }
    return out;
}

}  // namespace eduvsum::model
