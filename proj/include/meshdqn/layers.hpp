#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "meshdqn/graph.hpp"
#include "meshdqn/tape.hpp"

namespace meshdqn {

/// h_i' = relu(W1 h_i + W2 mean_{j in N(i)} h_j); isolated nodes aggregate a
/// zero vector.
inline Tape::Id sage_forward(Tape& tape, Tape::Id x, const GraphBatch& g, Tape::Id w_self,
                             Tape::Id w_neigh) {
    const Tape::Id self_term = tape.matmul(x, w_self);
    const Tape::Id agg = tape.neighbor_mean(x, g.edges);
    const Tape::Id neigh_term = tape.matmul(agg, w_neigh);
    return tape.relu(tape.add(self_term, neigh_term));
}

/// H' = relu(D^{-1/2} (A + I) D^{-1/2} H W).
inline Tape::Id gcn_forward(Tape& tape, Tape::Id x, const GraphBatch& g, Tape::Id w) {
    return tape.relu(tape.matmul(tape.gcn_mix(x, g.edges), w));
}

struct TopkResult {
    Tape::Id x = -1;           // kept node features, gated by tanh(score)
    GraphBatch graph;          // induced connectivity for the kept nodes
    std::vector<int> selected; // kept node indices in the input graph
};

/// Keep the ceil(ratio * n) highest-scoring nodes of each graph in the batch,
/// score s = x . p/||p||, ties broken toward the lower node index. Kept
/// features are gated with tanh(s).
inline TopkResult topk_pool(Tape& tape, Tape::Id x, const GraphBatch& g, Tape::Id p,
                            double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0))
        throw std::invalid_argument("topk_pool: ratio must be in (0, 1]");
    const int n = tape.value(x).rows;
    if (n == 0) throw std::invalid_argument("topk_pool: empty graph");

    const Tape::Id score = tape.matmul(x, tape.unit_vector(p));  // n x 1
    const Tensor& s = tape.value(score);

    std::vector<std::vector<int>> per_graph(g.n_graphs);
    for (int i = 0; i < n; ++i) per_graph[g.graph_of[i]].push_back(i);

    std::vector<int> selected;
    for (const std::vector<int>& nodes : per_graph) {
        if (nodes.empty()) throw std::invalid_argument("topk_pool: graph with no nodes");
        const int k = static_cast<int>(std::ceil(ratio * static_cast<double>(nodes.size())));
        std::vector<int> order = nodes;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (s.at(a, 0) != s.at(b, 0)) return s.at(a, 0) > s.at(b, 0);
            return a < b;
        });
        order.resize(k);
        std::sort(order.begin(), order.end());
        selected.insert(selected.end(), order.begin(), order.end());
    }
    std::sort(selected.begin(), selected.end());

    const Tape::Id gate = tape.tanh(tape.gather_rows(score, selected));
    const Tape::Id kept = tape.rowwise_mul(tape.gather_rows(x, selected), gate);

    TopkResult out;
    out.x = kept;
    out.graph = g.induced(selected, tape.value(x).cols);
    out.selected = std::move(selected);
    return out;
}

/// concat(mean, max) over each graph's nodes: n_graphs x 2 * n_features.
inline Tape::Id global_readout(Tape& tape, Tape::Id x, const GraphBatch& g) {
    const Tape::Id mean = tape.segment_mean(x, g.graph_of, g.n_graphs);
    const Tape::Id max = tape.segment_max(x, g.graph_of, g.n_graphs);
    return tape.hconcat(mean, max);
}

inline Tape::Id dense(Tape& tape, Tape::Id x, Tape::Id w, Tape::Id b) {
    return tape.add_rowvec(tape.matmul(x, w), b);
}

}  // namespace meshdqn
