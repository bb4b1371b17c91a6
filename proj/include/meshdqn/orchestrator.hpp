#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <thread>

#include "meshdqn/checkpoint.hpp"
#include "meshdqn/config.hpp"
#include "meshdqn/env.hpp"
#include "meshdqn/metrics.hpp"
#include "meshdqn/replay.hpp"

namespace meshdqn {

/// Immutable weight publication; version is gap-free from 1.
struct WeightSnapshot {
    long version = 0;
    bool updating_a = true;
    long total_env_steps = 0;  // drives the epsilon schedule
    std::vector<Tensor> params_a, params_b;
};

struct WorkerReport {
    int worker = 0;
    long snapshot_version = 0;
    std::vector<Transition> transitions;
    int steps = 0;
    double cumulative_reward = 0.0;
    double final_error = 0.0;
    int vertices_removed = 0;
};

struct TrainResult {
    std::vector<EpisodeMetrics> metrics;               // server ingestion order
    std::vector<std::vector<long>> observed_versions;  // per worker, fetch order
    std::vector<long> published_versions;              // server publication order
    long transitions_sent = 0;
    long transitions_ingested = 0;
    long transitions_discarded = 0;  // pushed after the budget was reached
    Checkpoint final_checkpoint;
    std::string checkpoint_path;
    std::string metrics_path;
};

namespace detail {

/// One full ε-greedy episode with the snapshot's weights.
inline WorkerReport play_episode(int worker_id, const WeightSnapshot& snap, QNetwork& net_a,
                                 QNetwork& net_b, const std::shared_ptr<const TriMesh>& mesh,
                                 const SnapshotSet& snaps, const EnvConfig& env_cfg,
                                 const EpsilonSchedule& eps, std::mt19937_64& rng) {
    assign_parameters(net_a, snap.params_a);
    assign_parameters(net_b, snap.params_b);
    QNetwork& behavior = snap.updating_a ? net_a : net_b;
    const double epsilon = eps.value(snap.total_env_steps);

    WorkerReport rep;
    rep.worker = worker_id;
    rep.snapshot_version = snap.version;

    EpisodeState ep = make_episode(mesh, snaps, env_cfg);
    while (!ep.done) {
        StateGraph state = ep.state;
        const int action = select_action(behavior, state.graph, epsilon, rng);
        const StepResult r = step(ep, action, env_cfg);
        rep.transitions.push_back({std::move(state), action, ep.state, r.reward, r.done});
        rep.steps += 1;
        rep.cumulative_reward += r.reward;
    }
    rep.final_error = ep.error;
    rep.vertices_removed = ep.n_gt - ep.mesh->n_vertices();
    return rep;
}

/// Serialized server state: replay, agent, counters, publication log.
class TrainServer {
  public:
    TrainServer(const RunConfig& cfg, int n_snapshots, const std::string& out_dir)
        : cfg_(cfg),
          agent_(DqnAgent::init(cfg.qnetwork_config(n_snapshots), cfg.seed, cfg.adam_config(),
                                cfg.gamma)),
          buffer_(static_cast<size_t>(cfg.replay_capacity)),
          rng_(cfg.seed),
          out_dir_(out_dir) {}

    std::shared_ptr<const WeightSnapshot> publish() {
        auto snap = std::make_shared<WeightSnapshot>();
        snap->version = ++version_;
        snap->updating_a = agent_.updating_a;
        snap->total_env_steps = env_steps_;
        snap->params_a = copy_parameters(agent_.a);
        snap->params_b = copy_parameters(agent_.b);
        published_.push_back(snap->version);
        return snap;
    }

    /// Returns the metrics line for the ingested episode.
    EpisodeMetrics ingest(WorkerReport rep) {
        transitions_ingested_ += static_cast<long>(rep.transitions.size());
        for (Transition& t : rep.transitions) buffer_.push(std::move(t));
        env_steps_ += rep.steps;
        episodes_done_ += 1;

        double loss = std::numeric_limits<double>::quiet_NaN();
        const size_t gate = std::max<size_t>(cfg_.batch_size, cfg_.warmup_transitions);
        if (buffer_.size() >= gate) {
            loss = train_step(agent_, buffer_, cfg_.batch_size, rng_);
            train_steps_ += 1;
        }
        if (episodes_done_ % cfg_.swap_cadence == 0) agent_.swap_roles();

        EpisodeMetrics m;
        m.episode = episodes_done_ - 1;
        m.worker = rep.worker;
        m.steps = rep.steps;
        m.cumulative_reward = rep.cumulative_reward;
        m.final_error = rep.final_error;
        m.vertices_removed = rep.vertices_removed;
        m.mean_loss = loss;
        m.version = rep.snapshot_version;
        return m;
    }

    Checkpoint checkpoint() const {
        Checkpoint c = make_checkpoint(agent_);
        c.episodes = episodes_done_;
        c.env_steps = env_steps_;
        c.train_steps = train_steps_;
        c.version = version_;
        c.rng_state = serialize_rng(rng_);
        return c;
    }
    void write_checkpoint(const std::string& path) const { save_checkpoint(path, checkpoint()); }

    long episodes_done() const { return episodes_done_; }
    long transitions_ingested() const { return transitions_ingested_; }
    const std::vector<long>& published_versions() const { return published_; }

  private:
    RunConfig cfg_;
    DqnAgent agent_;
    ReplayBuffer buffer_;
    std::mt19937_64 rng_;
    std::string out_dir_;
    long episodes_done_ = 0;
    long env_steps_ = 0;
    long train_steps_ = 0;
    long version_ = 0;
    long transitions_ingested_ = 0;
    std::vector<long> published_;
};

}  // namespace detail

/// Train on an in-memory fixture. Workers fetch the latest weight snapshot
/// (blocking until it is newer than the one they last used), play one
/// ε-greedy episode, and send the transitions; the single server ingests
/// them, trains, swaps roles on cadence, and publishes. workers=1 runs
/// synchronously in the calling thread and is exactly reproducible.
inline TrainResult run_training(const RunConfig& cfg, std::shared_ptr<const TriMesh> mesh,
                                const SnapshotSet& snaps) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);

    TrainResult result;
    result.checkpoint_path = (fs::path(cfg.out_dir) / "checkpoint.bin").string();
    result.metrics_path = (fs::path(cfg.out_dir) / "metrics.jsonl").string();
    result.observed_versions.resize(cfg.workers);

    detail::TrainServer server(cfg, snaps.n_snapshots(), cfg.out_dir);
    MetricsWriter metrics_out(result.metrics_path);
    const EnvConfig env_cfg = cfg.env_config();
    const EpsilonSchedule eps = cfg.epsilon_schedule();
    const QNetworkConfig qcfg = cfg.qnetwork_config(snaps.n_snapshots());

    auto finish = [&](detail::TrainServer& s) {
        s.write_checkpoint(result.checkpoint_path);
        result.final_checkpoint = s.checkpoint();
        result.published_versions = s.published_versions();
        result.transitions_ingested = s.transitions_ingested();
    };

    if (cfg.episodes == 0) {
        finish(server);
        return result;
    }

    if (cfg.workers == 1) {
        QNetwork net_a = QNetwork::init(qcfg, 0), net_b = QNetwork::init(qcfg, 0);
        std::mt19937_64 worker_rng(cfg.seed + 1000003ULL);
        auto snap = server.publish();
        while (server.episodes_done() < cfg.episodes) {
            result.observed_versions[0].push_back(snap->version);
            WorkerReport rep = detail::play_episode(0, *snap, net_a, net_b, mesh, snaps,
                                                    env_cfg, eps, worker_rng);
            result.transitions_sent += static_cast<long>(rep.transitions.size());
            const EpisodeMetrics m = server.ingest(std::move(rep));
            metrics_out.write(m);
            result.metrics.push_back(m);
            snap = server.publish();
            if (server.episodes_done() % cfg.checkpoint_every == 0)
                server.write_checkpoint(result.checkpoint_path);
        }
        finish(server);
        return result;
    }

    struct Shared {
        std::mutex snap_mu;
        std::condition_variable snap_cv;
        std::shared_ptr<const WeightSnapshot> latest;
        std::atomic<bool> stop{false};

        std::mutex q_mu;
        std::condition_variable q_cv;
        std::deque<WorkerReport> queue;
    } shared;

    {
        std::lock_guard<std::mutex> lock(shared.snap_mu);
        shared.latest = server.publish();
    }

    std::vector<long> sent_per_worker(cfg.workers, 0);
    std::vector<std::thread> threads;
    threads.reserve(cfg.workers);
    for (int w = 0; w < cfg.workers; ++w) {
        threads.emplace_back([&, w] {
            std::mt19937_64 worker_rng(cfg.seed + 1000003ULL * static_cast<
                                       unsigned long long>(w + 1));
            QNetwork net_a = QNetwork::init(qcfg, 0), net_b = QNetwork::init(qcfg, 0);
            long last_seen = 0;
            while (true) {
                std::shared_ptr<const WeightSnapshot> snap;
                {
                    std::unique_lock<std::mutex> lock(shared.snap_mu);
                    shared.snap_cv.wait(lock, [&] {
                        return shared.stop.load() || shared.latest->version > last_seen;
                    });
                    if (shared.stop.load()) return;
                    snap = shared.latest;
                }
                last_seen = snap->version;
                result.observed_versions[w].push_back(snap->version);
                try {
                    WorkerReport rep = detail::play_episode(w, *snap, net_a, net_b, mesh,
                                                            snaps, env_cfg, eps, worker_rng);
                    sent_per_worker[w] += static_cast<long>(rep.transitions.size());
                    {
                        std::lock_guard<std::mutex> lock(shared.q_mu);
                        shared.queue.push_back(std::move(rep));
                    }
                    shared.q_cv.notify_one();
                } catch (const std::exception& e) {
                    log_error("worker " + std::to_string(w) + " failed an episode: " +
                              e.what() + "; restarting");
                }
            }
        });
    }

    while (server.episodes_done() < cfg.episodes) {
        WorkerReport rep;
        {
            std::unique_lock<std::mutex> lock(shared.q_mu);
            shared.q_cv.wait(lock, [&] { return !shared.queue.empty(); });
            rep = std::move(shared.queue.front());
            shared.queue.pop_front();
        }
        const EpisodeMetrics m = server.ingest(std::move(rep));
        metrics_out.write(m);
        result.metrics.push_back(m);
        {
            std::lock_guard<std::mutex> lock(shared.snap_mu);
            shared.latest = server.publish();
        }
        shared.snap_cv.notify_all();
        if (server.episodes_done() % cfg.checkpoint_every == 0)
            server.write_checkpoint(result.checkpoint_path);
    }

    shared.stop.store(true);
    shared.snap_cv.notify_all();
    for (std::thread& t : threads) t.join();

    for (long s : sent_per_worker) result.transitions_sent += s;
    for (const WorkerReport& rep : shared.queue)
        result.transitions_discarded += static_cast<long>(rep.transitions.size());

    finish(server);
    return result;
}

/// File-based entry: loads the mesh/snapshot pair named in the config.
inline TrainResult run_training(const RunConfig& cfg) {
    cfg.validate();
    auto mesh = std::make_shared<const TriMesh>(read_msh(cfg.mesh_file));
    const SnapshotSet snaps =
        std::filesystem::path(cfg.snapshot_file).extension() == ".csv"
            ? read_snapshots_csv(cfg.snapshot_file, mesh)
            : read_snapshots(cfg.snapshot_file, mesh);
    return run_training(cfg, mesh, snaps);
}

struct EvalStep {
    int action = -1;
    int global_vertex = -1;
    double error = 0.0;
    double reward = 0.0;
    int n_vertices = 0;
    std::vector<double> drag, lift;  // per snapshot, interpolated
};

struct EvalResult {
    std::vector<EvalStep> trace;  // trace[0] is the initial state
    int initial_vertices = 0;
    int vertices_removed = 0;
    double final_error = 0.0;
    std::string removed_pct;  // e.g. "5.023%"
    std::string error_pct;    // e.g. "0.039%"
    std::shared_ptr<const TriMesh> final_mesh;
};

namespace detail {

inline std::string format_pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f%%", 100.0 * fraction);
    return buf;
}

inline EvalStep measured_step(const EpisodeState& ep, const EnvConfig& cfg) {
    EvalStep s;
    s.error = ep.error;
    s.n_vertices = ep.mesh->n_vertices();
    s.drag = compute_property(ep.snaps, *ep.mesh, cfg.body_tag, {1.0, 0.0}, cfg.fluid).values;
    s.lift = compute_property(ep.snaps, *ep.mesh, cfg.body_tag, {0.0, 1.0}, cfg.fluid).values;
    return s;
}

}  // namespace detail

/// Roll an episode under `pick(ep) -> action`, recording per-step property
/// vectors; row 0 is the untouched initial state.
template <class Policy>
EvalResult traced_rollout(EpisodeState ep, const EnvConfig& cfg, Policy&& pick) {
    EvalResult out;
    out.initial_vertices = ep.n_gt;
    out.trace.push_back(detail::measured_step(ep, cfg));
    while (!ep.done) {
        const int action = pick(ep);
        const int n = static_cast<int>(ep.state.window.size());
        const int victim = action < n ? ep.state.window[action] : -1;
        const StepResult r = step(ep, action, cfg);
        EvalStep s = detail::measured_step(ep, cfg);
        s.action = action;
        s.global_vertex = victim;
        s.reward = r.reward;
        out.trace.push_back(std::move(s));
    }
    out.vertices_removed = ep.n_gt - ep.mesh->n_vertices();
    out.final_error = ep.error;
    out.removed_pct = detail::format_pct(static_cast<double>(out.vertices_removed) / ep.n_gt);
    out.error_pct = detail::format_pct(out.final_error);
    out.final_mesh = ep.mesh;
    return out;
}

/// Greedy (ε = 0) evaluation of a trained checkpoint on a mesh/snapshot pair.
inline EvalResult evaluate(const Checkpoint& ckpt, const std::string& mesh_file,
                           const std::string& snapshot_file, const RunConfig& cfg) {
    const EnvConfig env_cfg = cfg.env_config();
    EpisodeState ep = reset(mesh_file, snapshot_file, env_cfg);
    if (ckpt.net.in_features != 2 + 3 * ep.snaps.n_snapshots())
        throw std::invalid_argument("evaluate: checkpoint expects " +
                                    std::to_string(ckpt.net.in_features) +
                                    " features per vertex, fixture provides " +
                                    std::to_string(2 + 3 * ep.snaps.n_snapshots()));
    if (ckpt.net.n_actions != cfg.window + 1)
        throw std::invalid_argument("evaluate: checkpoint action count does not match window");
    DqnAgent agent = restore_agent(ckpt);
    const QNetwork& net = agent.select_net();
    std::mt19937_64 unused_rng(0);
    return traced_rollout(std::move(ep), env_cfg, [&](const EpisodeState& e) {
        return select_action(net, e.state.graph, 0.0, unused_rng);
    });
}

}  // namespace meshdqn
