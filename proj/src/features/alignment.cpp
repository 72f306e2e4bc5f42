#include "eduvsum/features/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eduvsum/core/errors.hpp"

namespace eduvsum::features {

namespace {

// Index of the frame whose interval (t[k-1], t[k]] holds `t`; -1 past the last frame.
int owning_frame(double t, std::span<const double> ts) {
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.end()) return -1;
    return static_cast<int>(it - ts.begin());
}

void check_sorted(std::span<const double> ts) {
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (!(ts[i] > ts[i - 1])) fail(ErrorKind::InvalidInput, "frame timestamps must be strictly increasing");
    }
}

}  // namespace

std::optional<FeatureMatrix> align_audio_to_frames(const FeatureMatrix& short_term, double window, double step,
                                                   std::span<const double> frame_timestamps) {
    if (short_term.rows() == 0) return std::nullopt;
    check_sorted(frame_timestamps);
    const auto frames = static_cast<Eigen::Index>(frame_timestamps.size());
    // Accumulate in double so the mean of identical rows reproduces them exactly.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(frames, short_term.cols());
    std::vector<int> counts(frames, 0);
    for (Eigen::Index r = 0; r < short_term.rows(); ++r) {
        const double centre = r * step + window / 2.0;
        const int k = owning_frame(centre, frame_timestamps);
        if (k < 0) continue;
        sums.row(k) += short_term.row(r).cast<double>();
        ++counts[k];
    }
    FeatureMatrix out(frames, short_term.cols());
    for (Eigen::Index k = 0; k < frames; ++k) {
        if (counts[k] > 0) {
            out.row(k) = (sums.row(k) / counts[k]).cast<float>();
            continue;
        }
        const double t = frame_timestamps[k];
        const double idx = std::round((t - window / 2.0) / step);
        const auto nearest =
            static_cast<Eigen::Index>(std::clamp(idx, 0.0, static_cast<double>(short_term.rows() - 1)));
        out.row(k) = short_term.row(nearest);
    }
    return out;
}

FeatureMatrix align_text_to_frames(std::span<const WordVector> words, std::span<const double> frame_timestamps,
                                   int dim) {
    check_sorted(frame_timestamps);
    const auto frames = static_cast<Eigen::Index>(frame_timestamps.size());
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(frames, dim);
    std::vector<int> counts(frames, 0);
    for (const auto& w : words) {
        if (w.vector.size() != dim) fail(ErrorKind::Contract, "word vector width mismatch");
        const int k = owning_frame(w.timestamp, frame_timestamps);
        if (k < 0) continue;
        sums.row(k) += w.vector.transpose().cast<double>();
        ++counts[k];
    }
    for (Eigen::Index k = 0; k < frames; ++k) {
        if (counts[k] > 1) sums.row(k) /= counts[k];
    }
    return sums.cast<float>();
}

}  // namespace eduvsum::features
