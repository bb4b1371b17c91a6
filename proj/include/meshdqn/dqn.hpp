#pragma once

#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include "meshdqn/optim.hpp"
#include "meshdqn/qnetwork.hpp"
#include "meshdqn/replay.hpp"
#include "meshdqn/reward.hpp"

namespace meshdqn {

struct EpsilonSchedule {
    double start = 1.0;
    double finish = 0.05;
    long long decay_steps = 10000;

    double value(long long step) const {
        if (decay_steps <= 0 || step >= decay_steps) return finish;
        if (step <= 0) return start;
        const double f = static_cast<double>(step) / static_cast<double>(decay_steps);
        return start + (finish - start) * f;
    }
};

inline int argmax_lowest(const Tensor& q, int row) {
    int best = 0;
    for (int c = 1; c < q.cols; ++c)
        if (q.at(row, c) > q.at(row, best)) best = c;
    return best;
}

/// Epsilon-greedy over the state's action set (window slots + 'no removal').
inline int select_action(const QNetwork& net, const GraphBatch& state, double epsilon,
                         std::mt19937_64& rng) {
    const int n_actions = net.cfg.n_actions;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
        std::uniform_int_distribution<int> pick(0, n_actions - 1);
        return pick(rng);
    }
    return argmax_lowest(qnet_values(net, state), 0);
}

/// Y = r for terminal transitions, else r + gamma * Q_eval(s', argmax_a Q_select(s', a)).
inline std::vector<double> double_dqn_target(const std::vector<const Transition*>& batch,
                                             const QNetwork& q_select, const QNetwork& q_eval,
                                             double gamma) {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("dqn: gamma outside [0, 1]");
    std::vector<double> targets(batch.size());
    std::vector<GraphBatch> next_states;
    std::vector<size_t> live;
    for (size_t i = 0; i < batch.size(); ++i) {
        targets[i] = batch[i]->reward;
        if (!batch[i]->terminal) {
            live.push_back(i);
            next_states.push_back(batch[i]->next_state.graph);
        }
    }
    if (!live.empty()) {
        const GraphBatch joined = GraphBatch::concat(next_states);
        const Tensor qs = qnet_values(q_select, joined);
        const Tensor qe = qnet_values(q_eval, joined);
        for (size_t k = 0; k < live.size(); ++k) {
            const int row = static_cast<int>(k);
            targets[live[k]] += gamma * qe.at(row, argmax_lowest(qs, row));
        }
    }
    return targets;
}

/// Two symmetric Q-networks whose training role alternates.
struct DqnAgent {
    QNetwork a, b;
    Adam opt_a, opt_b;
    bool updating_a = true;
    double gamma = 1.0;

    static DqnAgent init(const QNetworkConfig& cfg, std::uint64_t seed,
                         const AdamConfig& adam = {}, double gamma = 1.0) {
        DqnAgent ag;
        ag.a = QNetwork::init(cfg, seed);
        ag.b = QNetwork::init(cfg, seed + 1);
        ag.opt_a = Adam(adam);
        ag.opt_b = Adam(adam);
        ag.gamma = gamma;
        return ag;
    }

    /// The network currently receiving gradient updates; it also selects the
    /// argmax action inside the Double DQN target.
    QNetwork& select_net() { return updating_a ? a : b; }
    const QNetwork& select_net() const { return updating_a ? a : b; }
    const QNetwork& eval_net() const { return updating_a ? b : a; }
    Adam& optimizer() { return updating_a ? opt_a : opt_b; }

    void swap_roles() { updating_a = !updating_a; }
};

/// One optimization step: sample, build Double DQN targets, Huber loss on the
/// selecting network's predictions at the taken actions, one Adam step.
inline double train_step(DqnAgent& agent, const ReplayBuffer& buffer, size_t batch_size,
                         std::mt19937_64& rng) {
    const auto batch = buffer.sample(batch_size, rng);
    const std::vector<double> targets =
        double_dqn_target(batch, agent.select_net(), agent.eval_net(), agent.gamma);

    std::vector<GraphBatch> states;
    std::vector<std::pair<int, int>> taken;
    states.reserve(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) {
        states.push_back(batch[i]->state.graph);
        taken.push_back({static_cast<int>(i), batch[i]->action});
    }

    QForward f = qnet_forward(agent.select_net(), GraphBatch::concat(states));
    const Tape::Id pred = f.tape.gather_entries(f.q, taken);
    const Tape::Id loss = f.tape.huber_loss(pred, targets);
    const double loss_value = f.tape.value(loss).at(0, 0);
    f.tape.backward(loss);

    std::vector<Tensor*> params = agent.select_net().parameters();
    std::vector<const Tensor*> grads;
    grads.reserve(params.size());
    for (size_t i = 0; i < params.size(); ++i) grads.push_back(&f.tape.grad(f.params[i]));
    agent.optimizer().step(params, grads);
    return loss_value;
}

}  // namespace meshdqn
