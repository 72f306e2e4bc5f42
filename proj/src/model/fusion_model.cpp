#include "eduvsum/model/fusion_model.hpp"

#include <cmath>
#include <string>

#include <Eigen/QR>

#include "eduvsum/core/errors.hpp"

namespace eduvsum::model {

namespace {

constexpr std::array<Modality, 3> kAll{Modality::Visual, Modality::Audio, Modality::Text};

Mat glorot_uniform(Rng& rng, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Mat m(fan_in, fan_out);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-limit, limit);
    return m;
}

// Rows are orthonormal when rows <= cols (the u x 4u recurrent kernel).
Mat orthogonal(Rng& rng, int rows, int cols) {
    const int big = std::max(rows, cols), small = std::min(rows, cols);
    Mat a(big, small);
    for (Eigen::Index c = 0; c < a.cols(); ++c)
        for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = rng.normal();
    Eigen::HouseholderQR<Mat> qr(a);
    Mat q = qr.householderQ() * Mat::Identity(big, small);
    const Mat r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
    for (int k = 0; k < small; ++k) {
        if (r(k, k) < 0) q.col(k) = -q.col(k);
    }
    return rows < cols ? Mat(q.transpose()) : q;
}

Mat softmax_rows(const Mat& logits) {
    Mat p = logits.colwise() - logits.rowwise().maxCoeff();
    p = p.array().exp().matrix();
    p.array().colwise() /= p.rowwise().sum().array();
    return p;
}

Mat dropout_mask(Rng& rng, Eigen::Index rows, Eigen::Index cols, double rate) {
    const double keep = 1.0 - rate;
    Mat m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return m;
}

}  // namespace

Eigen::Index Batch::size() const {
    for (const auto& seq : inputs)
        if (!seq.empty()) return seq.front().rows();
    return 0;
}

Batch make_batch(std::span<const WindowedExample> examples) {
    Batch batch;
    if (examples.empty()) return batch;
    for (int m = 0; m < 3; ++m) {
        const auto& first = examples.front().inputs[m];
        if (!first) continue;
        const Eigen::Index steps = first->rows(), dim = first->cols();
        batch.inputs[m].assign(steps, Mat(static_cast<Eigen::Index>(examples.size()), dim));
        for (std::size_t b = 0; b < examples.size(); ++b) {
            const auto& seq = examples[b].inputs[m];
            if (!seq || seq->rows() != steps || seq->cols() != dim) {
                fail(ErrorKind::Contract, "examples in a batch differ in shape or modalities");
            }
            for (Eigen::Index k = 0; k < steps; ++k) batch.inputs[m][k].row(b) = seq->row(k);
        }
    }
    return batch;
}

int predicted_score(std::span<const double> probs) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(probs.size()); ++k)
        if (probs[k] > probs[best]) best = k;
    return best + 1;
}

struct FusionModel::Forward {
    std::array<LstmCache, 3> branch_fwd, branch_bwd;
    std::array<Sequence, 3> branch_mask;
    Sequence fused;
    LstmCache shared_fwd, shared_bwd;
    Mat shared_out, shared_mask;
    Mat a1, a2, probs;
};

FusionModel::FusionModel(const ModelConfig& config) : config_(config) {
    config_.validate();
    Rng rng(config_.seed);
    const int u = config_.rnn_units;
    auto add_bilstm = [&](const std::string& prefix, int d) {
        const int base = static_cast<int>(params_.size());
        for (const char* dir : {"fwd", "bwd"}) {
            Mat b = Mat::Zero(1, 4 * u);
            b.middleCols(u, u).setOnes();
            params_.push_back({prefix + "." + dir + ".W", glorot_uniform(rng, d, 4 * u)});
            params_.push_back({prefix + "." + dir + ".U", orthogonal(rng, u, 4 * u)});
            params_.push_back({prefix + "." + dir + ".b", std::move(b)});
        }
        return base;
    };
    for (Modality m : kAll) {
        if (config_.modalities.contains(m)) branch_base_[static_cast<int>(m)] = add_bilstm(features::to_string(m), config_.input_dim(m));
    }
    shared_base_ = add_bilstm("shared", 2 * u * config_.modalities.count());
    dense_base_ = static_cast<int>(params_.size());
    int width = 2 * u;
    const std::array<int, 3> sizes{config_.dense_sizes[0], config_.dense_sizes[1], config_.classes};
    const std::array<const char*, 3> names{"dense1", "dense2", "output"};
    for (int k = 0; k < 3; ++k) {
        params_.push_back({std::string(names[k]) + ".W", glorot_uniform(rng, width, sizes[k])});
        params_.push_back({std::string(names[k]) + ".b", Mat::Zero(1, sizes[k])});
        width = sizes[k];
    }
}

long long FusionModel::parameter_count() const {
    long long n = 0;
    for (const auto& t : params_) n += t.value.size();
    return n;
}

LstmWeights FusionModel::lstm(int base) const {
    return {params_[base].value, params_[base + 1].value, params_[base + 2].value};
}

void FusionModel::check_batch(const Batch& batch) const {
    const Eigen::Index rows = batch.size();
    if (rows == 0) fail(ErrorKind::Contract, "empty batch");
    const auto steps = static_cast<std::size_t>(config_.history) + 1;
    for (Modality m : kAll) {
        const auto& seq = batch.inputs[static_cast<int>(m)];
        const std::string name = features::to_string(m);
        if (!config_.modalities.contains(m)) {
            if (!seq.empty()) fail(ErrorKind::Contract, name + " input supplied but the modality is disabled");
            continue;
        }
        if (seq.size() != steps) {
            fail(ErrorKind::Contract, name + " input has " + std::to_string(seq.size()) + " steps, expected " +
                                          std::to_string(steps));
        }
        for (const Mat& x : seq) {
            if (x.rows() != rows || x.cols() != config_.input_dim(m)) {
                fail(ErrorKind::Contract, name + " input is " + std::to_string(x.rows()) + "x" +
                                              std::to_string(x.cols()) + ", expected width " +
                                              std::to_string(config_.input_dim(m)));
            }
        }
    }
}

void FusionModel::forward(const Batch& batch, Rng* dropout_rng, Forward& fw) const {
    check_batch(batch);
    const Eigen::Index rows = batch.size();
    const int steps = config_.history + 1;
    const int u = config_.rnn_units;
    const bool drop = dropout_rng != nullptr && config_.dropout > 0.0;

    fw.fused.assign(steps, Mat(rows, 2 * u * config_.modalities.count()));
    int col = 0;
    for (Modality m : kAll) {
        const int mi = static_cast<int>(m);
        if (branch_base_[mi] < 0) continue;
        const auto& xs = batch.inputs[mi];
        lstm_forward(lstm(branch_base_[mi]), xs, false, fw.branch_fwd[mi]);
        lstm_forward(lstm(branch_base_[mi] + 3), xs, true, fw.branch_bwd[mi]);
        fw.branch_mask[mi].clear();
        for (int t = 0; t < steps; ++t) {
            auto block = fw.fused[t].middleCols(col, 2 * u);
            block.leftCols(u) = fw.branch_fwd[mi].output_at(t);
            block.rightCols(u) = fw.branch_bwd[mi].output_at(t);
            if (drop) {
                fw.branch_mask[mi].push_back(dropout_mask(*dropout_rng, rows, 2 * u, config_.dropout));
                block.array() *= fw.branch_mask[mi].back().array();
            }
        }
        col += 2 * u;
    }

    lstm_forward(lstm(shared_base_), fw.fused, false, fw.shared_fwd);
    lstm_forward(lstm(shared_base_ + 3), fw.fused, true, fw.shared_bwd);
    fw.shared_out.resize(rows, 2 * u);
    fw.shared_out.leftCols(u) = fw.shared_fwd.final_output();
    fw.shared_out.rightCols(u) = fw.shared_bwd.final_output();
    if (drop) {
        fw.shared_mask = dropout_mask(*dropout_rng, rows, 2 * u, config_.dropout);
        fw.shared_out.array() *= fw.shared_mask.array();
    } else {
        fw.shared_mask.resize(0, 0);
    }

    const auto& p = params_;
    const int d = dense_base_;
    fw.a1 = fw.shared_out * p[d].value;
    fw.a1.rowwise() += p[d + 1].value.row(0);
    fw.a1 = fw.a1.cwiseMax(0.0);
    fw.a2 = fw.a1 * p[d + 2].value;
    fw.a2.rowwise() += p[d + 3].value.row(0);
    fw.a2 = fw.a2.cwiseMax(0.0);
    Mat logits = fw.a2 * p[d + 4].value;
    logits.rowwise() += p[d + 5].value.row(0);
    fw.probs = softmax_rows(logits);
}

Mat FusionModel::predict_proba(const Batch& batch) const {
    Forward fw;
    forward(batch, nullptr, fw);
    return fw.probs;
}

std::pair<int, int> FusionModel::fused_shape(const Batch& batch) const {
    Forward fw;
    forward(batch, nullptr, fw);
    return {static_cast<int>(fw.fused.size()), static_cast<int>(fw.fused.front().cols())};
}

double FusionModel::loss(const Batch& batch, std::span<const int> labels, std::vector<Mat>* grads,
                         Rng* dropout_rng) const {
    const Eigen::Index rows = batch.size();
    if (static_cast<Eigen::Index>(labels.size()) != rows) {
        fail(ErrorKind::InvalidInput, "label count differs from batch size");
    }
    Forward fw;
    forward(batch, dropout_rng, fw);

    double total = 0.0;
    for (Eigen::Index b = 0; b < rows; ++b) {
        const int y = labels[b];
        if (y < 0 || y >= config_.classes) fail(ErrorKind::InvalidInput, "label out of range");
        total -= std::log(std::max(fw.probs(b, y), 1e-300));
    }
    const double mean = total / static_cast<double>(rows);
    if (!grads) return mean;

    grads->clear();
    for (const auto& t : params_) grads->push_back(Mat::Zero(t.value.rows(), t.value.cols()));
    auto& g = *grads;
    const auto& p = params_;
    const int d = dense_base_;
    const int u = config_.rnn_units;
    const int steps = config_.history + 1;

    Mat dlogits = fw.probs;
    for (Eigen::Index b = 0; b < rows; ++b) dlogits(b, labels[b]) -= 1.0;
    dlogits /= static_cast<double>(rows);

    g[d + 4].noalias() = fw.a2.transpose() * dlogits;
    g[d + 5] = dlogits.colwise().sum();
    Mat da2 = dlogits * p[d + 4].value.transpose();
    da2.array() *= (fw.a2.array() > 0.0).cast<double>();
    g[d + 2].noalias() = fw.a1.transpose() * da2;
    g[d + 3] = da2.colwise().sum();
    Mat da1 = da2 * p[d + 2].value.transpose();
    da1.array() *= (fw.a1.array() > 0.0).cast<double>();
    g[d].noalias() = fw.shared_out.transpose() * da1;
    g[d + 1] = da1.colwise().sum();
    Mat ds = da1 * p[d].value.transpose();
    if (fw.shared_mask.size() > 0) ds.array() *= fw.shared_mask.array();

    // The shared layer only emits its final states.
    Sequence dh_fwd(steps), dh_bwd(steps);
    dh_fwd[steps - 1] = ds.leftCols(u);
    dh_bwd[0] = ds.rightCols(u);
    Sequence dfused(steps, Mat::Zero(rows, fw.fused.front().cols()));
    const int s = shared_base_;
    lstm_backward(lstm(s), fw.fused, fw.shared_fwd, dh_fwd, {g[s], g[s + 1], g[s + 2]}, &dfused);
    lstm_backward(lstm(s + 3), fw.fused, fw.shared_bwd, dh_bwd, {g[s + 3], g[s + 4], g[s + 5]}, &dfused);

    int col = 0;
    for (Modality m : kAll) {
        const int mi = static_cast<int>(m);
        const int base = branch_base_[mi];
        if (base < 0) continue;
        Sequence dy_fwd(steps), dy_bwd(steps);
        for (int t = 0; t < steps; ++t) {
            Mat block = dfused[t].middleCols(col, 2 * u);
            if (!fw.branch_mask[mi].empty()) block.array() *= fw.branch_mask[mi][t].array();
            dy_fwd[t] = block.leftCols(u);
            dy_bwd[t] = block.rightCols(u);
        }
        const auto& xs = batch.inputs[mi];
        lstm_backward(lstm(base), xs, fw.branch_fwd[mi], dy_fwd, {g[base], g[base + 1], g[base + 2]}, nullptr);
        lstm_backward(lstm(base + 3), xs, fw.branch_bwd[mi], dy_bwd, {g[base + 3], g[base + 4], g[base + 5]},
                      nullptr);
        col += 2 * u;
    }
    return mean;
}

}  // namespace eduvsum::model
