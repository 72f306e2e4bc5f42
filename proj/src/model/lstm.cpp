#include "eduvsum/model/lstm.hpp"

namespace eduvsum::model {

namespace {

Mat sigmoid(const Mat& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

}  // namespace

void lstm_forward(const LstmWeights& w, const Sequence& xs, bool reverse, LstmCache& cache) {
    const int steps = static_cast<int>(xs.size());
    const Eigen::Index batch = steps > 0 ? xs.front().rows() : 0;
    const Eigen::Index u = w.U.rows();
    cache.reverse = reverse;
    for (auto* v : {&cache.i, &cache.f, &cache.g, &cache.o, &cache.tc}) v->assign(steps, Mat());
    cache.h.assign(steps + 1, Mat::Zero(batch, u));
    cache.c.assign(steps + 1, Mat::Zero(batch, u));
    for (int s = 0; s < steps; ++s) {
        const Mat& x = xs[reverse ? steps - 1 - s : s];
        Mat z = x * w.W + cache.h[s] * w.U;
        z.rowwise() += w.b.row(0);
        cache.i[s] = sigmoid(z.middleCols(0, u));
        cache.f[s] = sigmoid(z.middleCols(u, u));
        cache.g[s] = z.middleCols(2 * u, u).array().tanh().matrix();
        cache.o[s] = sigmoid(z.middleCols(3 * u, u));
        cache.c[s + 1] = (cache.f[s].array() * cache.c[s].array() + cache.i[s].array() * cache.g[s].array()).matrix();
        cache.tc[s] = cache.c[s + 1].array().tanh().matrix();
        cache.h[s + 1] = (cache.o[s].array() * cache.tc[s].array()).matrix();
    }
}

void lstm_backward(const LstmWeights& w, const Sequence& xs, const LstmCache& cache, const Sequence& dh,
                   LstmGrads grads, Sequence* dxs) {
    const int steps = cache.steps();
    if (steps == 0) return;
    const Eigen::Index batch = xs.front().rows();
    const Eigen::Index u = w.U.rows();
    Mat dh_next = Mat::Zero(batch, u);
    Mat dc_next = Mat::Zero(batch, u);
    Mat dz(batch, 4 * u);
    for (int s = steps - 1; s >= 0; --s) {
        const int t = cache.reverse ? steps - 1 - s : s;
        Mat dh_s = dh_next;
        if (dh[t].size() > 0) dh_s += dh[t];
        const auto tc = cache.tc[s].array();
        const auto o = cache.o[s].array();
        const auto i = cache.i[s].array();
        const auto f = cache.f[s].array();
        const auto g = cache.g[s].array();
        const Eigen::ArrayXXd dc = dh_s.array() * o * (1.0 - tc * tc) + dc_next.array();
        dz.middleCols(0, u) = (dc * g * i * (1.0 - i)).matrix();
        dz.middleCols(u, u) = (dc * cache.c[s].array() * f * (1.0 - f)).matrix();
        dz.middleCols(2 * u, u) = (dc * i * (1.0 - g * g)).matrix();
        dz.middleCols(3 * u, u) = (dh_s.array() * tc * o * (1.0 - o)).matrix();
        dc_next = (dc * f).matrix();
        grads.W.noalias() += xs[t].transpose() * dz;
        grads.U.noalias() += cache.h[s].transpose() * dz;
        grads.b.row(0) += dz.colwise().sum();
        dh_next.noalias() = dz * w.U.transpose();
        if (dxs) (*dxs)[t].noalias() += dz * w.W.transpose();
    }
}

}  // namespace eduvsum::model
