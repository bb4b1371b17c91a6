#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "meshdqn/orchestrator.hpp"

namespace fs = std::filesystem;
using namespace meshdqn;

namespace {

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw std::invalid_argument(std::string(what) + " path not set");
    if (!fs::exists(path))
        throw std::invalid_argument(std::string(what) + " file not found: " + path);
}

struct CommonOpts {
    std::string config_path;
    unsigned long long seed = 0;
    int workers = 0;
    long episodes = -1;
    std::string out;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* episodes_opt = nullptr;
    CLI::Option* out_opt = nullptr;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--config", config_path, "config file (defaults apply when omitted)");
        seed_opt = cmd.add_option("--seed", seed, "override training.seed");
        workers_opt = cmd.add_option("--workers", workers, "override training.workers");
        episodes_opt = cmd.add_option("--episodes", episodes, "override training.episodes");
        out_opt = cmd.add_option("--out", out, "override paths.out_dir");
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path.empty()) {
            require_file(config_path, "config");
            cfg = load_config(config_path);
        }
        if (seed_opt && seed_opt->count()) cfg.seed = seed;
        if (workers_opt && workers_opt->count()) cfg.workers = workers;
        if (episodes_opt && episodes_opt->count()) cfg.episodes = episodes;
        if (out_opt && out_opt->count()) cfg.out_dir = out;
        cfg.validate();
        return cfg;
    }
};

void write_trajectory_csv(const std::string& path, const EvalResult& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trajectory file " + path);
    const size_t k = r.trace.empty() ? 0 : r.trace.front().drag.size();
    out << "step,action,error,reward,n_vertices";
    for (size_t i = 1; i <= k; ++i) out << ",drag_" << i;
    for (size_t i = 1; i <= k; ++i) out << ",lift_" << i;
    out << "\n";
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (size_t i = 0; i < r.trace.size(); ++i) {
        const EvalStep& s = r.trace[i];
        out << i << "," << s.action << "," << num(s.error) << "," << num(s.reward) << ","
            << s.n_vertices;
        for (double v : s.drag) out << "," << num(v);
        for (double v : s.lift) out << "," << num(v);
        out << "\n";
    }
}

void write_rollout_outputs(const RunConfig& cfg, const EvalResult& r, const char* label) {
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);
    write_msh((dir / "rollout.msh").string(), *r.final_mesh);
    write_trajectory_csv((dir / "trajectory.csv").string(), r);
    std::ofstream summary((dir / "summary.txt").string());
    summary << "mode: " << label << "\n"
            << "initial_vertices: " << r.initial_vertices << "\n"
            << "vertices_removed: " << r.vertices_removed << " (" << r.removed_pct << ")\n"
            << "final_error: " << r.final_error << " (" << r.error_pct << ")\n"
            << "steps: " << r.trace.size() - 1 << "\n";
    std::printf("%s: removed %d of %d vertices (%s), final error %s\n", label,
                r.vertices_removed, r.initial_vertices, r.removed_pct.c_str(),
                r.error_pct.c_str());
    std::printf("wrote %s and %s\n", (dir / "rollout.msh").string().c_str(),
                (dir / "trajectory.csv").string().c_str());
}

int cmd_train(const CommonOpts& common) {
    const RunConfig cfg = common.resolve();
    require_file(cfg.mesh_file, "mesh");
    require_file(cfg.snapshot_file, "snapshot");
    const TrainResult r = run_training(cfg);
    std::ofstream summary((fs::path(cfg.out_dir) / "summary.txt").string());
    double last_reward = 0.0;
    if (!r.metrics.empty()) last_reward = r.metrics.back().cumulative_reward;
    summary << "episodes: " << r.metrics.size() << "\n"
            << "env_steps: " << r.final_checkpoint.env_steps << "\n"
            << "train_steps: " << r.final_checkpoint.train_steps << "\n"
            << "last_episode_reward: " << last_reward << "\n"
            << "checkpoint: " << r.checkpoint_path << "\n"
            << "metrics: " << r.metrics_path << "\n";
    std::printf("trained %zu episodes (%ld env steps, %ld train steps)\n", r.metrics.size(),
                r.final_checkpoint.env_steps, r.final_checkpoint.train_steps);
    std::printf("wrote %s and %s\n", r.checkpoint_path.c_str(), r.metrics_path.c_str());
    return 0;
}

int cmd_rollout(const CommonOpts& common, const std::string& checkpoint_path) {
    const RunConfig cfg = common.resolve();
    require_file(checkpoint_path, "checkpoint");
    require_file(cfg.mesh_file, "mesh");
    require_file(cfg.snapshot_file, "snapshot");
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const EvalResult r = evaluate(ckpt, cfg.mesh_file, cfg.snapshot_file, cfg);
    write_rollout_outputs(cfg, r, "agent");
    return 0;
}

int cmd_baseline(const CommonOpts& common, const std::string& strategy) {
    const RunConfig cfg = common.resolve();
    require_file(cfg.mesh_file, "mesh");
    require_file(cfg.snapshot_file, "snapshot");
    const EnvConfig env_cfg = cfg.env_config();
    EpisodeState ep = reset(cfg.mesh_file, cfg.snapshot_file, env_cfg);

    EvalResult r;
    if (strategy == "random") {
        std::mt19937_64 rng(cfg.seed);
        r = traced_rollout(std::move(ep), env_cfg, [&](const EpisodeState& e) {
            std::uniform_int_distribution<int> pick(
                0, static_cast<int>(e.state.window.size()) - 1);
            return pick(rng);
        });
    } else {
        r = traced_rollout(std::move(ep), env_cfg, [&](const EpisodeState& e) {
            int best = 0;
            double best_err = std::numeric_limits<double>::infinity();
            for (int a = 0; a < static_cast<int>(e.state.window.size()); ++a) {
                EpisodeState probe = e;
                step(probe, a, env_cfg);
                const double err = probe.removals == e.removals
                                       ? std::numeric_limits<double>::infinity()
                                       : probe.error;
                if (err < best_err) {
                    best_err = err;
                    best = a;
                }
            }
            return best;
        });
    }
    write_rollout_outputs(cfg, r, strategy.c_str());
    return 0;
}

struct FixtureOpts {
    std::string kind = "obstacle";
    std::string out;
    int nx = 9, ny = 7;
    double length = 3.0, height = 1.0;
    double hole_x = 1.5, hole_y = 0.5, hole_half_x = 0.35, hole_half_y = 0.22;
    int snapshots = 2;
    int order = 1;
    double u_max = 1.0;
};

int cmd_fixture(const FixtureOpts& o) {
    if (o.out.empty()) throw std::invalid_argument("fixture: --out directory required");
    fs::create_directories(o.out);
    const fs::path dir(o.out);

    std::shared_ptr<const TriMesh> mesh;
    AnalyticKind kind;
    std::string body;
    if (o.kind == "obstacle") {
        mesh = std::make_shared<const TriMesh>(gen_channel_with_obstacle(
            o.nx, o.ny, o.length, o.height, {o.hole_x, o.hole_y}, {o.hole_half_x, o.hole_half_y}));
        kind = AnalyticKind::ShearPressure;
        body = "airfoil";
    } else if (o.kind == "poiseuille" || o.kind == "uniform") {
        mesh = std::make_shared<const TriMesh>(gen_channel_mesh(o.nx, o.ny, o.length, o.height));
        kind = o.kind == "poiseuille" ? AnalyticKind::Poiseuille : AnalyticKind::Uniform;
        body = "wall";
    } else {
        throw std::invalid_argument("fixture: unknown kind '" + o.kind + "'");
    }

    AnalyticParams params;
    params.u_max = o.u_max;
    params.height = o.height;
    params.length = o.length;
    params.n_snapshots = o.snapshots;
    params.velocity_order = o.order;
    const SnapshotSet snaps = analytic_snapshots(kind, mesh, params);

    const fs::path mesh_path = dir / "mesh.msh";
    const fs::path snap_path = dir / "snapshots.bin";
    write_msh(mesh_path.string(), *mesh);
    write_snapshots(snap_path.string(), snaps);

    RunConfig cfg;
    cfg.mesh_file = mesh_path.string();
    cfg.snapshot_file = snap_path.string();
    cfg.out_dir = (dir / "run").string();
    cfg.body = body;
    cfg.snapshot_count = o.snapshots;
    cfg.velocity_order = o.order;
    const int interior = static_cast<int>(mesh->interior_vertices().size());
    cfg.window = std::min(cfg.window, std::max(2, interior - cfg.max_offset));
    save_config((dir / "config.ini").string(), cfg);

    std::printf("fixture '%s': %d vertices (%d interior), %d snapshot(s), order %d\n",
                o.kind.c_str(), mesh->n_vertices(), interior, o.snapshots, o.order);
    std::printf("wrote %s, %s, %s\n", mesh_path.string().c_str(), snap_path.string().c_str(),
                (dir / "config.ini").string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph-RL mesh coarsening: generate fixtures, train, evaluate, compare"};
    app.require_subcommand(1);

    CommonOpts train_opts, rollout_opts, baseline_opts;
    std::string checkpoint_path, strategy;
    FixtureOpts fixture_opts;

    CLI::App* train = app.add_subcommand("train", "train an agent on a mesh/snapshot pair");
    train_opts.add_to(*train);

    CLI::App* rollout = app.add_subcommand("rollout", "greedy rollout of a trained checkpoint");
    rollout_opts.add_to(*rollout);
    rollout->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();

    CLI::App* baseline = app.add_subcommand("baseline", "random or greedy removal baseline");
    baseline_opts.add_to(*baseline);
    baseline->add_option("--strategy", strategy, "baseline strategy")
        ->required()
        ->check(CLI::IsMember({"random", "greedy"}));

    CLI::App* fixture = app.add_subcommand("fixture", "write a mesh/snapshot/config fixture");
    fixture->add_option("--kind", fixture_opts.kind, "poiseuille | uniform | obstacle")
        ->check(CLI::IsMember({"poiseuille", "uniform", "obstacle"}));
    fixture->add_option("--out", fixture_opts.out, "output directory")->required();
    fixture->add_option("--nx", fixture_opts.nx, "grid columns");
    fixture->add_option("--ny", fixture_opts.ny, "grid rows");
    fixture->add_option("--length", fixture_opts.length, "channel length");
    fixture->add_option("--height", fixture_opts.height, "channel height");
    fixture->add_option("--hole-x", fixture_opts.hole_x, "obstacle center x");
    fixture->add_option("--hole-y", fixture_opts.hole_y, "obstacle center y");
    fixture->add_option("--hole-half-x", fixture_opts.hole_half_x, "obstacle half width");
    fixture->add_option("--hole-half-y", fixture_opts.hole_half_y, "obstacle half height");
    fixture->add_option("--snapshots", fixture_opts.snapshots, "snapshot count");
    fixture->add_option("--order", fixture_opts.order, "velocity order (1 or 2)");
    fixture->add_option("--u-max", fixture_opts.u_max, "peak velocity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(train)) return cmd_train(train_opts);
        if (app.got_subcommand(rollout)) return cmd_rollout(rollout_opts, checkpoint_path);
        if (app.got_subcommand(baseline)) return cmd_baseline(baseline_opts, strategy);
        return cmd_fixture(fixture_opts);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
