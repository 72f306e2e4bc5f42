#pragma once

#include <vector>

#include <Eigen/Core>

namespace eduvsum::model {

using Mat = Eigen::MatrixXd;
// One B x d matrix per time step.
using Sequence = std::vector<Mat>;

// Keras layout: W is d x 4u, U is u x 4u, b is 1 x 4u, gate blocks i, f, c, o.
struct LstmWeights {
    const Mat& W;
    const Mat& U;
    const Mat& b;
};

struct LstmGrads {
    Mat& W;
    Mat& U;
    Mat& b;
};

// Indexed by processing step s; h and c have one extra leading zero state.
struct LstmCache {
    bool reverse = false;
    std::vector<Mat> h, c, i, f, g, o, tc;

    int steps() const { return static_cast<int>(i.size()); }
    // Output for input time t (reverse runs are realigned to input order).
    const Mat& output_at(int t) const { return h[(reverse ? steps() - 1 - t : t) + 1]; }
    const Mat& final_output() const { return h.back(); }
};

void lstm_forward(const LstmWeights& w, const Sequence& xs, bool reverse, LstmCache& cache);

// dh[t] is the loss gradient at the output for input time t; an empty matrix
// stands for zero. Gradients are added into `grads`, and into dxs when given.
void lstm_backward(const LstmWeights& w, const Sequence& xs, const LstmCache& cache, const Sequence& dh,
                   LstmGrads grads, Sequence* dxs);

}  // namespace eduvsum::model
