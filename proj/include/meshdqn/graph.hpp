#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "meshdqn/tensor.hpp"

namespace meshdqn {

/// Node features plus directed edge list (both directions for undirected
/// graphs), per-edge Euclidean distances, and a node-to-graph assignment so
/// several graphs can ride in one batch.
struct GraphBatch {
    Tensor x;                                 // n_nodes x n_features
    std::vector<std::pair<int, int>> edges;   // (src, dst)
    std::vector<double> edge_attr;            // distance per edge
    std::vector<int> graph_of;                // node -> graph index
    int n_graphs = 1;

    int n_nodes() const { return x.rows; }
    int n_features() const { return x.cols; }

    void validate() const {
        if (static_cast<int>(graph_of.size()) != x.rows)
            throw std::invalid_argument("GraphBatch: assignment size != node count");
        if (edge_attr.size() != edges.size())
            throw std::invalid_argument("GraphBatch: edge attribute count != edge count");
        std::vector<bool> hit(n_graphs, false);
        for (int g : graph_of) {
            if (g < 0 || g >= n_graphs)
                throw std::invalid_argument("GraphBatch: graph index out of range");
            hit[g] = true;
        }
        for (bool h : hit)
            if (!h) throw std::invalid_argument("GraphBatch: assignment not surjective");
        for (const auto& [s, d] : edges)
            if (s < 0 || s >= x.rows || d < 0 || d >= x.rows)
                throw std::invalid_argument("GraphBatch: edge endpoint out of range");
        for (double a : edge_attr)
            if (!(a >= 0.0)) throw std::invalid_argument("GraphBatch: negative edge distance");
    }

    /// Stack several graphs into one batch, renumbering nodes and graphs.
    static GraphBatch concat(const std::vector<GraphBatch>& parts) {
        if (parts.empty()) throw std::invalid_argument("GraphBatch::concat: empty batch");
        int nodes = 0, feats = parts[0].x.cols;
        for (const GraphBatch& p : parts) {
            if (p.x.cols != feats)
                throw std::invalid_argument("GraphBatch::concat: feature width mismatch");
            nodes += p.x.rows;
        }
        GraphBatch out;
        out.x = Tensor(nodes, feats);
        out.n_graphs = 0;
        int base = 0;
        for (const GraphBatch& p : parts) {
            for (int r = 0; r < p.x.rows; ++r)
                for (int c = 0; c < feats; ++c) out.x.at(base + r, c) = p.x.at(r, c);
            for (size_t e = 0; e < p.edges.size(); ++e) {
                out.edges.push_back({p.edges[e].first + base, p.edges[e].second + base});
                out.edge_attr.push_back(p.edge_attr[e]);
            }
            for (int g : p.graph_of) out.graph_of.push_back(g + out.n_graphs);
            out.n_graphs += p.n_graphs;
            base += p.x.rows;
        }
        return out;
    }

    /// Subgraph induced by `kept` (old node indices, any order); node i of the
    /// result is kept[i]. Features are NOT copied (they live on the tape);
    /// only connectivity and assignment survive.
    GraphBatch induced(const std::vector<int>& kept, int n_features_out) const {
        std::vector<int> remap(x.rows, -1);
        for (size_t i = 0; i < kept.size(); ++i) remap[kept[i]] = static_cast<int>(i);
        GraphBatch out;
        out.x = Tensor(static_cast<int>(kept.size()), n_features_out);
        out.n_graphs = n_graphs;
        out.graph_of.reserve(kept.size());
        for (int old : kept) out.graph_of.push_back(graph_of[old]);
        for (size_t e = 0; e < edges.size(); ++e) {
            const int s = remap[edges[e].first], d = remap[edges[e].second];
            if (s >= 0 && d >= 0) {
                out.edges.push_back({s, d});
                out.edge_attr.push_back(edge_attr[e]);
            }
        }
        return out;
    }
};

}  // namespace meshdqn
