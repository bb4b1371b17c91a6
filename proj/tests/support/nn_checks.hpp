#pragma once

// Dense reference implementations and a finite-difference gradient harness
// shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshdqn/qnetwork.hpp"

namespace nn_checks {

using meshdqn::GraphBatch;
using meshdqn::Tape;
using meshdqn::Tensor;

inline GraphBatch random_graph(int n, int features, std::mt19937_64& rng,
                               double edge_prob = 0.3) {
    GraphBatch g;
    g.x = Tensor(n, features);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : g.x.data) v = u(rng);
    g.graph_of.assign(n, 0);
    g.n_graphs = 1;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng) < edge_prob) {
                const double d = coin(rng) + 0.1;
                g.edges.push_back({i, j});
                g.edges.push_back({j, i});
                g.edge_attr.push_back(d);
                g.edge_attr.push_back(d);
            }
    g.validate();
    return g;
}

inline Tensor random_tensor(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
    Tensor t(r, c);
    std::uniform_real_distribution<double> u(-scale, scale);
    for (double& v : t.data) v = u(rng);
    return t;
}

/// Dense reference: mean-aggregation matrix applied with plain loops.
inline Tensor sage_dense_oracle(const GraphBatch& g, const Tensor& w_self,
                                const Tensor& w_neigh) {
    const int n = g.n_nodes();
    std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
    std::vector<int> deg(n, 0);
    for (const auto& [s, d] : g.edges) ++deg[d];
    for (const auto& [s, d] : g.edges) M[d][s] += 1.0 / deg[d];

    Tensor out(n, w_self.cols);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < w_self.cols; ++c) {
            double acc = 0.0;
            for (int k = 0; k < g.x.cols; ++k) {
                double mean_k = 0.0;
                for (int j = 0; j < n; ++j) mean_k += M[i][j] * g.x.at(j, k);
                acc += g.x.at(i, k) * w_self.at(k, c) + mean_k * w_neigh.at(k, c);
            }
            out.at(i, c) = std::max(acc, 0.0);
        }
    return out;
}

/// Dense reference: normalized adjacency with self loops.
inline Tensor gcn_dense_oracle(const GraphBatch& g, const Tensor& w) {
    const int n = g.n_nodes();
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) A[i][i] = 1.0;
    for (const auto& [s, d] : g.edges) A[d][s] += 1.0;
    std::vector<double> dsqrt(n);
    for (int i = 0; i < n; ++i) {
        double deg = 0.0;
        for (int j = 0; j < n; ++j) deg += A[i][j];
        dsqrt[i] = 1.0 / std::sqrt(deg);
    }
    Tensor out(n, w.cols);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < w.cols; ++c) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                if (A[i][j] == 0.0) continue;
                double xw = 0.0;
                for (int k = 0; k < g.x.cols; ++k) xw += g.x.at(j, k) * w.at(k, c);
                acc += dsqrt[i] * A[i][j] * dsqrt[j] * xw;
            }
            out.at(i, c) = std::max(acc, 0.0);
        }
    return out;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::logic_error("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

/// Central finite differences against tape gradients for a recorded loss.
/// build() must re-record the same computation from the (possibly nudged)
/// parameter tensors and return (tape, loss id, leaf ids).
struct GradCheck {
    double max_rel_err = 0.0;
    int checked = 0;
    int skipped = 0;
};

/// build(tape, params, leaf_ids_out, token_out) records the loss and may
/// append a structure token (e.g. top-k selections); entries whose nudge
/// changes the token sit on a selection boundary and are skipped.
template <typename BuildFn>
GradCheck check_gradients(std::vector<Tensor>& params, BuildFn build, double h = 1e-5) {
    Tape tape;
    std::vector<Tape::Id> ids;
    std::string tok_center;
    const Tape::Id loss = build(tape, params, ids, &tok_center);
    tape.backward(loss);

    GradCheck res;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        for (size_t k = 0; k < params[pi].size(); ++k) {
            const double saved = params[pi].data[k];
            params[pi].data[k] = saved + h;
            Tape tp;
            std::vector<Tape::Id> dummy;
            std::string tok_p, tok_m;
            const double lp = tp.value(build(tp, params, dummy, &tok_p)).at(0, 0);
            params[pi].data[k] = saved - h;
            Tape tm;
            dummy.clear();
            const double lm = tm.value(build(tm, params, dummy, &tok_m)).at(0, 0);
            params[pi].data[k] = saved;
            if (tok_p != tok_center || tok_m != tok_center) {
                ++res.skipped;
                continue;
            }

            const double fd = (lp - lm) / (2.0 * h);
            const double ad = tape.grad(ids[pi]).data[k];
            const double denom = std::max({std::abs(fd), std::abs(ad), 1e-6});
            res.max_rel_err = std::max(res.max_rel_err, std::abs(fd - ad) / denom);
            ++res.checked;
        }
    }
    return res;
}

}  // namespace nn_checks
