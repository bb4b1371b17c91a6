#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "meshdqn/fields.hpp"
#include "meshdqn/flow.hpp"
#include "meshdqn/log.hpp"
#include "meshdqn/mesh.hpp"
#include "meshdqn/msh_io.hpp"
#include "meshdqn/reward.hpp"
#include "meshdqn/snapshot_io.hpp"
#include "meshdqn/state.hpp"

namespace meshdqn {

struct EnvConfig {
    int window = 180;
    double removal_fraction = 0.05;
    int smoothing_iterations = 50;
    int max_offset = 20;
    RewardConfig reward;
    Vec2 direction{1.0, 0.0};
    BoundaryTag body_tag = BoundaryTag::Airfoil;
    FluidConstants fluid;

    void validate() const {
        if (window < 1) throw std::invalid_argument("env: window must be positive");
        if (removal_fraction <= 0.0 || removal_fraction >= 1.0)
            throw std::invalid_argument("env: removal fraction outside (0, 1)");
        if (smoothing_iterations < 0) throw std::invalid_argument("env: negative smoothing");
        if (max_offset < 0) throw std::invalid_argument("env: negative max_offset");
        if (std::abs(direction.norm() - 1.0) > 1e-12)
            throw std::invalid_argument("env: direction must be a unit vector");
        reward.validate();
        fluid.validate();
    }
};

struct EpisodeState {
    std::shared_ptr<const TriMesh> mesh;  // current smoothed mesh
    SnapshotSet snaps;                    // fields interpolated onto it
    SnapshotSet source;                   // fixed per-episode interpolation source
    PropertyVector ground_truth;
    int n_gt = 0;
    int removal_target = 0;
    int removals = 0;
    double error = 0.0;
    bool done = false;
    StateGraph state;
};

/// Window vertices ranked by distance to the tagged body (ties by index),
/// ranks [offset, offset + n_window); features [x, y, u per snapshot,
/// p per snapshot]; edges induced from the mesh with length attributes.
inline StateGraph build_state(const TriMesh& mesh, const SnapshotSet& snaps, int n_window,
                              int offset, BoundaryTag body_tag = BoundaryTag::Airfoil) {
    if (n_window < 1 || offset < 0) throw std::invalid_argument("build_state: bad window/offset");
    if (&mesh != &snaps.mesh() && !(mesh == snaps.mesh()))
        throw std::invalid_argument("build_state: snapshots belong to a different mesh");

    std::vector<int> anchors;
    for (int v = 0; v < mesh.n_vertices(); ++v)
        if (mesh.vertex_tag(v) == body_tag) anchors.push_back(v);
    if (anchors.empty())
        for (int v = 0; v < mesh.n_vertices(); ++v)
            if (mesh.is_boundary_vertex(v)) anchors.push_back(v);
    if (anchors.empty()) throw std::invalid_argument("build_state: mesh has no boundary");

    std::vector<int> interior = mesh.interior_vertices();
    if (static_cast<int>(interior.size()) < offset + n_window)
        throw std::invalid_argument("build_state: not enough interior vertices for the window");

    std::vector<std::pair<double, int>> ranked;
    ranked.reserve(interior.size());
    for (int v : interior) {
        double best = std::numeric_limits<double>::infinity();
        for (int a : anchors) best = std::min(best, (mesh.vertex(v) - mesh.vertex(a)).norm());
        ranked.push_back({best, v});
    }
    std::sort(ranked.begin(), ranked.end());

    StateGraph out;
    out.offset = offset;
    out.window.reserve(n_window);
    for (int i = offset; i < offset + n_window; ++i) out.window.push_back(ranked[i].second);

    const int s_count = snaps.n_snapshots();
    out.graph.x = Tensor(n_window, 2 + 3 * s_count);
    for (int i = 0; i < n_window; ++i) {
        const int v = out.window[i];
        out.graph.x.at(i, 0) = mesh.vertex(v).x;
        out.graph.x.at(i, 1) = mesh.vertex(v).y;
        for (int s = 0; s < s_count; ++s) {
            out.graph.x.at(i, 2 + 2 * s) = snaps.snapshot(s).vx[v];
            out.graph.x.at(i, 3 + 2 * s) = snaps.snapshot(s).vy[v];
            out.graph.x.at(i, 2 + 2 * s_count + s) = snaps.snapshot(s).p[v];
        }
    }

    std::vector<int> local(mesh.n_vertices(), -1);
    for (int i = 0; i < n_window; ++i) local[out.window[i]] = i;
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const auto [a, b] = mesh.edge(e);
        if (local[a] < 0 || local[b] < 0) continue;
        const double len = (mesh.vertex(a) - mesh.vertex(b)).norm();
        out.graph.edges.push_back({local[a], local[b]});
        out.graph.edges.push_back({local[b], local[a]});
        out.graph.edge_attr.push_back(len);
        out.graph.edge_attr.push_back(len);
    }
    out.graph.graph_of.assign(n_window, 0);
    out.graph.n_graphs = 1;
    out.graph.validate();
    return out;
}

/// Start an episode from in-memory data: smooth, re-interpolate, take the
/// resulting property values as ground truth (so the step-0 error is zero).
inline EpisodeState make_episode(const std::shared_ptr<const TriMesh>& raw_mesh,
                                 const SnapshotSet& raw_snaps, const EnvConfig& cfg) {
    cfg.validate();
    if (!raw_mesh) throw std::invalid_argument("make_episode: null mesh");

    std::optional<TriMesh> smoothed = smooth(*raw_mesh, cfg.smoothing_iterations);
    if (!smoothed) throw std::runtime_error("make_episode: initial smoothing broke the mesh");
    auto mesh = std::make_shared<const TriMesh>(std::move(*smoothed));

    std::optional<SnapshotSet> snaps = interpolate(raw_snaps, mesh);
    if (!snaps) throw std::runtime_error("make_episode: initial interpolation failed");

    EpisodeState ep;
    ep.mesh = mesh;
    ep.snaps = *snaps;
    ep.source = std::move(*snaps);
    ep.ground_truth = compute_property(ep.snaps, *mesh, cfg.body_tag, cfg.direction, cfg.fluid);
    for (double v : ep.ground_truth.values)
        if (v == 0.0)
            throw std::runtime_error("make_episode: a ground-truth property value is zero");
    ep.n_gt = mesh->n_vertices();
    ep.removal_target = static_cast<int>(std::ceil(cfg.removal_fraction * ep.n_gt));
    ep.state = build_state(*mesh, ep.snaps, cfg.window, 0, cfg.body_tag);
    ep.done = ep.removal_target == 0;
    return ep;
}

/// File-based episode start; snapshot format chosen by extension (.csv or binary).
inline EpisodeState reset(const std::filesystem::path& mesh_file,
                          const std::filesystem::path& snapshot_file, const EnvConfig& cfg) {
    auto mesh = std::make_shared<const TriMesh>(read_msh(mesh_file.string()));
    const SnapshotSet snaps = snapshot_file.extension() == ".csv"
                                  ? read_snapshots_csv(snapshot_file.string(), mesh)
                                  : read_snapshots(snapshot_file.string(), mesh);
    return make_episode(mesh, snaps, cfg);
}

struct StepResult {
    double reward = 0.0;
    bool done = false;
};

/// Apply one action: a window slot removes that vertex (remove, smooth,
/// re-interpolate from the episode source, re-measure); the extra last slot
/// shifts the window outward by one instead.
inline StepResult step(EpisodeState& ep, int action, const EnvConfig& cfg) {
    if (ep.done) throw std::logic_error("step: episode is already done");
    const int n = static_cast<int>(ep.state.window.size());
    if (action < 0 || action > n) throw std::invalid_argument("step: action out of range");

    if (action == n) {
        const RewardResult r = reward(StepOutcome::Ok, ep.error, ep.removals, cfg.reward);
        const int next_offset = ep.state.offset + 1;
        const bool window_fits =
            static_cast<int>(ep.mesh->interior_vertices().size()) >= next_offset + n;
        if (next_offset >= cfg.max_offset || !window_fits) {
            ep.done = true;
            log_debug("episode capped at no-removal offset " + std::to_string(next_offset));
        } else {
            ep.state = build_state(*ep.mesh, ep.snaps, n, next_offset, cfg.body_tag);
            ep.done = r.done;
        }
        return {r.value, ep.done};
    }

    const int victim = ep.state.window[action];
    std::optional<TriMesh> cut = remove_vertex(*ep.mesh, victim);
    std::optional<TriMesh> smoothed =
        cut ? smooth(*cut, cfg.smoothing_iterations) : std::nullopt;
    std::shared_ptr<const TriMesh> next_mesh;
    std::optional<SnapshotSet> next_snaps;
    if (smoothed) {
        next_mesh = std::make_shared<const TriMesh>(std::move(*smoothed));
        next_snaps = interpolate(ep.source, next_mesh);
    }
    if (!next_snaps) {
        ep.done = true;
        const RewardResult r = reward(StepOutcome::Broken, 0.0, 0, cfg.reward);
        return {r.value, true};
    }

    const PropertyVector now =
        compute_property(*next_snaps, *next_mesh, cfg.body_tag, cfg.direction, cfg.fluid);
    ep.error = property_error(ep.ground_truth, now);
    ep.removals += 1;
    ep.mesh = next_mesh;
    ep.snaps = std::move(*next_snaps);

    const RewardResult r = reward(StepOutcome::Ok, ep.error, ep.removals, cfg.reward);
    ep.done = r.done || ep.removals >= ep.removal_target;
    if (!ep.done) {
        if (static_cast<int>(ep.mesh->interior_vertices().size()) >= ep.state.offset + n)
            ep.state = build_state(*ep.mesh, ep.snaps, n, ep.state.offset, cfg.body_tag);
        else
            ep.done = true;
    }
    return {r.value, ep.done};
}

struct RolloutStep {
    int action = 0;
    int global_vertex = -1;  // -1 for 'no removal'
    double error = 0.0;
    double reward = 0.0;
    int n_vertices = 0;
};

/// Brute-force baseline: at each step simulate every removal action and take
/// the one with the smallest resulting error (ties to the lower slot).
inline std::vector<RolloutStep> greedy_rollout(EpisodeState ep, const EnvConfig& cfg) {
    std::vector<RolloutStep> trace;
    while (!ep.done) {
        const int n = static_cast<int>(ep.state.window.size());
        int best_action = 0;
        double best_err = std::numeric_limits<double>::infinity();
        for (int a = 0; a < n; ++a) {
            EpisodeState probe = ep;
            const StepResult r = step(probe, a, cfg);
            const bool broke = probe.removals == ep.removals;
            const double err = broke ? std::numeric_limits<double>::infinity() : probe.error;
            (void)r;
            if (err < best_err) {
                best_err = err;
                best_action = a;
            }
        }
        const int victim = ep.state.window[best_action];
        const StepResult r = step(ep, best_action, cfg);
        trace.push_back({best_action, victim, ep.error, r.reward, ep.mesh->n_vertices()});
    }
    return trace;
}

/// Random baseline: uniform over removal actions.
inline std::vector<RolloutStep> random_rollout(EpisodeState ep, const EnvConfig& cfg,
                                               std::mt19937_64& rng) {
    std::vector<RolloutStep> trace;
    while (!ep.done) {
        const int n = static_cast<int>(ep.state.window.size());
        std::uniform_int_distribution<int> pick(0, n - 1);
        const int a = pick(rng);
        const int victim = ep.state.window[a];
        const StepResult r = step(ep, a, cfg);
        trace.push_back({a, victim, ep.error, r.reward, ep.mesh->n_vertices()});
    }
    return trace;
}

}  // namespace meshdqn
