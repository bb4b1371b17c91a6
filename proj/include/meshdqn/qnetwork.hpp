#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "meshdqn/layers.hpp"
#include "meshdqn/optim.hpp"

namespace meshdqn {

struct QNetworkConfig {
    int in_features = 17;  // 2 coords + 3 per snapshot
    int width = 128;
    int n_actions = 181;   // window size + 1 for 'no removal'
    int sage_layers = 3;
    int gcn_layers = 3;
    double topk_ratio = 0.5;
    double init_gain = 0.9;

    void validate() const {
        if (in_features < 1 || width < 1 || n_actions < 2)
            throw std::invalid_argument("qnetwork: bad dimensions");
        if (sage_layers < 1 || gcn_layers < 0)
            throw std::invalid_argument("qnetwork: need at least one graph layer");
        if (!(topk_ratio > 0.0 && topk_ratio <= 1.0))
            throw std::invalid_argument("qnetwork: topk ratio out of range");
    }
};

struct SageParams {
    Tensor w_self, w_neigh;
};
struct GcnParams {
    Tensor w;
};
struct TopkParams {
    Tensor p;
};
struct DenseParams {
    Tensor w, b;
};

/// Graph-convolution stack with top-k pooling after every graph layer, the
/// per-stage mean/max readouts summed, and a two-layer dense head mapping the
/// pooled vector to one Q-value per action.
struct QNetwork {
    QNetworkConfig cfg;
    std::vector<SageParams> sage;
    std::vector<GcnParams> gcn;
    std::vector<TopkParams> pool;  // one per graph layer, in stack order
    DenseParams head1, head2;

    static QNetwork init(const QNetworkConfig& cfg, std::uint64_t seed) {
        cfg.validate();
        QNetwork net;
        net.cfg = cfg;
        std::mt19937_64 rng(seed);
        const double gain = cfg.init_gain;
        int in = cfg.in_features;
        for (int i = 0; i < cfg.sage_layers; ++i) {
            net.sage.push_back({xavier_normal_init(in, cfg.width, gain, rng),
                                xavier_normal_init(in, cfg.width, gain, rng)});
            net.pool.push_back({xavier_normal_init(cfg.width, 1, gain, rng)});
            in = cfg.width;
        }
        for (int i = 0; i < cfg.gcn_layers; ++i) {
            net.gcn.push_back({xavier_normal_init(cfg.width, cfg.width, gain, rng)});
            net.pool.push_back({xavier_normal_init(cfg.width, 1, gain, rng)});
        }
        net.head1 = {xavier_normal_init(2 * cfg.width, cfg.width, gain, rng),
                     Tensor(1, cfg.width)};
        net.head2 = {xavier_normal_init(cfg.width, cfg.n_actions, gain, rng),
                     Tensor(1, cfg.n_actions)};
        return net;
    }

    std::vector<Tensor*> parameters() {
        std::vector<Tensor*> out;
        for (auto& l : sage) {
            out.push_back(&l.w_self);
            out.push_back(&l.w_neigh);
        }
        for (auto& l : gcn) out.push_back(&l.w);
        for (auto& l : pool) out.push_back(&l.p);
        out.push_back(&head1.w);
        out.push_back(&head1.b);
        out.push_back(&head2.w);
        out.push_back(&head2.b);
        return out;
    }

    std::vector<const Tensor*> parameters() const {
        std::vector<const Tensor*> out;
        for (const auto& l : sage) {
            out.push_back(&l.w_self);
            out.push_back(&l.w_neigh);
        }
        for (const auto& l : gcn) out.push_back(&l.w);
        for (const auto& l : pool) out.push_back(&l.p);
        out.push_back(&head1.w);
        out.push_back(&head1.b);
        out.push_back(&head2.w);
        out.push_back(&head2.b);
        return out;
    }
};

struct QForward {
    Tape tape;
    Tape::Id q = -1;                 // n_graphs x n_actions
    std::vector<Tape::Id> params;    // leaf ids aligned with QNetwork::parameters()
    std::vector<std::vector<int>> pooled;  // surviving node ids per pooling stage
};

/// Record the full forward pass on a fresh tape; gradients for every
/// parameter become available after tape.backward(loss).
inline QForward qnet_forward(const QNetwork& net, const GraphBatch& batch) {
    QForward f;
    Tape& t = f.tape;

    std::vector<Tape::Id> sage_ids, gcn_ids, pool_ids;
    for (const auto& l : net.sage) {
        f.params.push_back(t.leaf(l.w_self));
        sage_ids.push_back(f.params.back());
        f.params.push_back(t.leaf(l.w_neigh));
        sage_ids.push_back(f.params.back());
    }
    for (const auto& l : net.gcn) {
        f.params.push_back(t.leaf(l.w));
        gcn_ids.push_back(f.params.back());
    }
    for (const auto& l : net.pool) {
        f.params.push_back(t.leaf(l.p));
        pool_ids.push_back(f.params.back());
    }
    const Tape::Id h1w = t.leaf(net.head1.w), h1b = t.leaf(net.head1.b);
    const Tape::Id h2w = t.leaf(net.head2.w), h2b = t.leaf(net.head2.b);
    f.params.push_back(h1w);
    f.params.push_back(h1b);
    f.params.push_back(h2w);
    f.params.push_back(h2b);

    Tape::Id x = t.leaf(batch.x);
    GraphBatch g = batch;
    Tape::Id readout_sum = -1;
    int stage = 0;
    auto pool_and_read = [&](Tape::Id h) {
        TopkResult pooled = topk_pool(t, h, g, pool_ids[stage], net.cfg.topk_ratio);
        ++stage;
        f.pooled.push_back(pooled.selected);
        x = pooled.x;
        g = std::move(pooled.graph);
        const Tape::Id r = global_readout(t, x, g);
        readout_sum = readout_sum < 0 ? r : t.add(readout_sum, r);
    };

    for (size_t i = 0; i < net.sage.size(); ++i)
        pool_and_read(sage_forward(t, x, g, sage_ids[2 * i], sage_ids[2 * i + 1]));
    for (size_t i = 0; i < net.gcn.size(); ++i) pool_and_read(gcn_forward(t, x, g, gcn_ids[i]));

    const Tape::Id hidden = t.relu(dense(t, readout_sum, h1w, h1b));
    f.q = dense(t, hidden, h2w, h2b);
    return f;
}

/// Inference convenience: Q-values without keeping the tape.
inline Tensor qnet_values(const QNetwork& net, const GraphBatch& batch) {
    QForward f = qnet_forward(net, batch);
    return f.tape.value(f.q);
}

}  // namespace meshdqn
