#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "eduvsum/core/rng.hpp"
#include "eduvsum/model/config.hpp"
#include "eduvsum/model/lstm.hpp"
#include "eduvsum/model/windows.hpp"

namespace eduvsum::model {

struct Tensor {
    std::string name;
    Mat value;
};

struct Batch {
    // inputs[m][k] is B x d_m for window step k (oldest first); empty when
    // modality m is not fed.
    std::array<Sequence, 3> inputs;

    Eigen::Index size() const;
};

Batch make_batch(std::span<const WindowedExample> examples);

struct PredictionDistribution {
    std::array<double, kClasses> probs{};
    int predicted_score = 1;
};

// argmax + 1, ties to the lowest class.
int predicted_score(std::span<const double> probs);

// Per-modality BiLSTM (sequences out), concatenation per step, shared BiLSTM
// read out as forward-last plus backward-first, dense 32 -> 16 (ReLU),
// softmax 10. Double precision throughout. Const methods are thread-safe.
class FusionModel {
public:
    // Seeded Glorot-uniform kernels, orthogonal recurrent kernels, forget bias 1.
    explicit FusionModel(const ModelConfig& config);

    const ModelConfig& config() const { return config_; }
    const std::vector<Tensor>& parameters() const { return params_; }
    std::vector<Tensor>& parameters() { return params_; }
    long long parameter_count() const;

    // B x 10 class probabilities, dropout off.
    Mat predict_proba(const Batch& batch) const;

    // Mean categorical cross-entropy over the batch. With `grads` set, fills
    // one gradient per parameter tensor. Dropout applies iff `dropout_rng` is set.
    double loss(const Batch& batch, std::span<const int> labels, std::vector<Mat>* grads = nullptr,
                Rng* dropout_rng = nullptr) const;

    // Rows x cols of the per-step concatenated tensor fed to the shared layer.
    std::pair<int, int> fused_shape(const Batch& batch) const;

private:
    struct Forward;

    void check_batch(const Batch& batch) const;
    void forward(const Batch& batch, Rng* dropout_rng, Forward& fw) const;
    LstmWeights lstm(int base) const;

    ModelConfig config_;
    std::vector<Tensor> params_;
    std::array<int, 3> branch_base_{-1, -1, -1};
    int shared_base_ = -1;
    int dense_base_ = -1;
};

}  // namespace eduvsum::model
