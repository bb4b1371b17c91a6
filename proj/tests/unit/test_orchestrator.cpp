#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "meshdqn/orchestrator.hpp"

using namespace meshdqn;

namespace {

namespace fs = std::filesystem;

struct Toy {
    std::shared_ptr<const TriMesh> mesh;
    SnapshotSet snaps;
    RunConfig cfg;
};

Toy toy_run(const std::string& out_dir) {
    Toy t;
    t.mesh = std::make_shared<const TriMesh>(
        gen_channel_with_obstacle(9, 7, 3.0, 1.0, {1.5, 0.5}, {0.35, 0.22}));
    AnalyticParams ap;
    ap.n_snapshots = 1;
    ap.velocity_order = 1;
    t.snaps = analytic_snapshots(AnalyticKind::ShearPressure, t.mesh, ap);

    t.cfg.out_dir = out_dir;
    t.cfg.window = 6;
    t.cfg.removal_fraction = 0.02;
    t.cfg.max_offset = 3;
    t.cfg.smoothing_iterations = 10;
    t.cfg.snapshot_count = 1;
    t.cfg.velocity_order = 1;
    t.cfg.width = 8;
    t.cfg.sage_layers = 1;
    t.cfg.gcn_layers = 1;
    t.cfg.lr = 0.001;
    t.cfg.workers = 1;
    t.cfg.episodes = 6;
    t.cfg.seed = 7;
    t.cfg.epsilon_finish = 0.1;
    t.cfg.epsilon_decay_steps = 40;
    t.cfg.swap_cadence = 2;
    t.cfg.batch_size = 4;
    t.cfg.replay_capacity = 64;
    t.cfg.warmup_transitions = 8;
    t.cfg.checkpoint_every = 3;
    return t;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& leaf) {
    const fs::path dir = fs::temp_directory_path() / "meshdqn_orch" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("single-worker training is byte-identical across runs") {
    const fs::path dir_a = fresh_dir("sync_a");
    const fs::path dir_b = fresh_dir("sync_b");
    Toy t = toy_run(dir_a.string());
    const TrainResult first = run_training(t.cfg, t.mesh, t.snaps);
    t.cfg.out_dir = dir_b.string();
    const TrainResult second = run_training(t.cfg, t.mesh, t.snaps);

    CHECK(slurp(first.metrics_path) == slurp(second.metrics_path));
    CHECK(slurp(first.checkpoint_path) == slurp(second.checkpoint_path));

    REQUIRE(first.metrics.size() == 6);
    for (size_t i = 0; i < first.metrics.size(); ++i) {
        CHECK(first.metrics[i].episode == static_cast<long>(i));
        CHECK(first.metrics[i].worker == 0);
        CHECK(first.metrics[i].steps >= 1);
        CHECK(first.metrics[i].version == static_cast<long>(i) + 1);
    }
    CHECK(std::isnan(first.metrics.front().mean_loss));
    CHECK(first.metrics.back().mean_loss >= 0.0);

    const std::vector<long> want_observed{1, 2, 3, 4, 5, 6};
    REQUIRE(first.observed_versions.size() == 1);
    CHECK(first.observed_versions[0] == want_observed);
    const std::vector<long> want_published{1, 2, 3, 4, 5, 6, 7};
    CHECK(first.published_versions == want_published);

    CHECK(first.transitions_sent == first.transitions_ingested);
    CHECK(first.transitions_discarded == 0);
    long steps = 0;
    for (const auto& m : first.metrics) steps += m.steps;
    CHECK(first.transitions_sent == steps);
    CHECK(first.final_checkpoint.env_steps == steps);
    CHECK(first.final_checkpoint.episodes == 6);

    SECTION("the metrics file parses back to the in-memory records") {
        const std::vector<EpisodeMetrics> parsed = read_metrics(first.metrics_path);
        REQUIRE(parsed.size() == first.metrics.size());
        for (size_t i = 0; i < parsed.size(); ++i) CHECK(parsed[i] == first.metrics[i]);
    }
    fs::remove_all(dir_a.parent_path());
}

TEST_CASE("four workers conserve transitions and see monotone versions") {
    const fs::path dir = fresh_dir("par");
    Toy t = toy_run(dir.string());
    t.cfg.workers = 4;
    t.cfg.episodes = 10;
    const TrainResult r = run_training(t.cfg, t.mesh, t.snaps);

    REQUIRE(r.metrics.size() == 10);
    CHECK(r.transitions_ingested + r.transitions_discarded == r.transitions_sent);
    CHECK(r.transitions_ingested >= 10);

    std::vector<long> want_published(11);
    for (int i = 0; i < 11; ++i) want_published[i] = i + 1;
    CHECK(r.published_versions == want_published);

    REQUIRE(r.observed_versions.size() == 4);
    int total_observed = 0;
    for (const auto& seq : r.observed_versions) {
        for (size_t i = 1; i < seq.size(); ++i) CHECK(seq[i] > seq[i - 1]);
        if (!seq.empty()) {
            CHECK(seq.front() >= 1);
            CHECK(seq.back() <= 11);
        }
        total_observed += static_cast<int>(seq.size());
    }
    CHECK(total_observed >= 10);

    for (const auto& m : r.metrics) {
        CHECK(m.worker >= 0);
        CHECK(m.worker < 4);
    }
    CHECK_NOTHROW(load_checkpoint(r.checkpoint_path));
    fs::remove_all(dir.parent_path());
}

TEST_CASE("a zero-episode budget checkpoints the initial weights immediately") {
    const fs::path dir = fresh_dir("zero");
    Toy t = toy_run(dir.string());
    t.cfg.episodes = 0;
    const TrainResult r = run_training(t.cfg, t.mesh, t.snaps);

    CHECK(r.metrics.empty());
    CHECK(slurp(r.metrics_path).empty());
    const Checkpoint c = load_checkpoint(r.checkpoint_path);
    CHECK(c.episodes == 0);
    CHECK(c.env_steps == 0);
    CHECK(c.train_steps == 0);
    CHECK(c.version == 0);

    const DqnAgent fresh = DqnAgent::init(t.cfg.qnetwork_config(1), t.cfg.seed,
                                          t.cfg.adam_config(), t.cfg.gamma);
    const std::vector<Tensor> want = copy_parameters(fresh.a);
    REQUIRE(c.params_a.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i) CHECK(c.params_a[i].data == want[i].data);
    fs::remove_all(dir.parent_path());
}

TEST_CASE("checkpoints restore the exact training state") {
    const fs::path dir = fresh_dir("ckpt");
    Toy t = toy_run(dir.string());
    const TrainResult r = run_training(t.cfg, t.mesh, t.snaps);
    const Checkpoint& c = r.final_checkpoint;

    SECTION("disk round-trip is bit-exact") {
        const Checkpoint loaded = load_checkpoint(r.checkpoint_path);
        CHECK(loaded.updating_a == c.updating_a);
        CHECK(loaded.gamma == c.gamma);
        CHECK(loaded.episodes == c.episodes);
        CHECK(loaded.env_steps == c.env_steps);
        CHECK(loaded.train_steps == c.train_steps);
        CHECK(loaded.version == c.version);
        CHECK(loaded.rng_state == c.rng_state);
        CHECK(loaded.net.width == c.net.width);
        CHECK(loaded.adam.lr == c.adam.lr);
        REQUIRE(loaded.params_a.size() == c.params_a.size());
        for (size_t i = 0; i < c.params_a.size(); ++i) {
            CHECK(loaded.params_a[i].data == c.params_a[i].data);
            CHECK(loaded.params_b[i].data == c.params_b[i].data);
        }
        REQUIRE(loaded.m_a.size() == c.m_a.size());
        for (size_t i = 0; i < c.m_a.size(); ++i) {
            CHECK(loaded.m_a[i].data == c.m_a[i].data);
            CHECK(loaded.v_a[i].data == c.v_a[i].data);
        }
        CHECK(loaded.t_a == c.t_a);
        CHECK(loaded.t_b == c.t_b);

        const fs::path again = dir / "again.bin";
        save_checkpoint(again.string(), loaded);
        CHECK(slurp(again.string()) == slurp(r.checkpoint_path));
    }
    SECTION("the restored agent behaves like the original") {
        const DqnAgent agent = restore_agent(c);
        CHECK(agent.updating_a == c.updating_a);
        CHECK(agent.opt_a.step_count() == c.t_a);
        const std::vector<Tensor> got = copy_parameters(agent.select_net());
        const std::vector<Tensor>& want = c.updating_a ? c.params_a : c.params_b;
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i) CHECK(got[i].data == want[i].data);
    }
    SECTION("corrupted files are rejected") {
        const fs::path bad = dir / "bad.bin";
        std::ofstream(bad.string(), std::ios::binary) << "not a checkpoint";
        CHECK_THROWS_AS(load_checkpoint(bad.string()), std::runtime_error);
        CHECK_THROWS_AS(load_checkpoint((dir / "absent.bin").string()), std::runtime_error);
    }
    fs::remove_all(dir.parent_path());
}

TEST_CASE("greedy evaluation is deterministic and traces the episode") {
    const fs::path dir = fresh_dir("eval");
    Toy t = toy_run(dir.string());
    const fs::path mesh_file = dir / "fixture.msh";
    const fs::path snap_file = dir / "fixture.snaps";
    write_msh(mesh_file.string(), *t.mesh);
    write_snapshots(snap_file.string(), t.snaps);

    const TrainResult r = run_training(t.cfg, t.mesh, t.snaps);
    const Checkpoint c = load_checkpoint(r.checkpoint_path);

    const EvalResult one = evaluate(c, mesh_file.string(), snap_file.string(), t.cfg);
    const EvalResult two = evaluate(c, mesh_file.string(), snap_file.string(), t.cfg);

    REQUIRE(one.trace.size() >= 2);
    REQUIRE(one.trace.size() == two.trace.size());
    for (size_t i = 0; i < one.trace.size(); ++i) {
        CHECK(one.trace[i].action == two.trace[i].action);
        CHECK(one.trace[i].error == two.trace[i].error);
        CHECK(one.trace[i].drag == two.trace[i].drag);
    }

    const EvalStep& start = one.trace.front();
    CHECK(start.action == -1);
    CHECK(start.global_vertex == -1);
    CHECK(start.error == 0.0);
    CHECK(start.n_vertices == one.initial_vertices);
    REQUIRE(start.drag.size() == 1);
    REQUIRE(start.lift.size() == 1);
    CHECK(start.drag[0] != 0.0);

    for (size_t i = 1; i < one.trace.size(); ++i) {
        const EvalStep& s = one.trace[i];
        if (s.global_vertex >= 0)
            CHECK(s.n_vertices == one.trace[i - 1].n_vertices - 1);
        else
            CHECK(s.n_vertices == one.trace[i - 1].n_vertices);
    }
    CHECK(one.final_error == one.trace.back().error);
    CHECK(one.vertices_removed == one.initial_vertices - one.trace.back().n_vertices);
    CHECK(one.removed_pct.back() == '%');
    CHECK(one.error_pct.back() == '%');
    CHECK(one.removed_pct.find('.') != std::string::npos);

    SECTION("a checkpoint trained for another window is refused") {
        RunConfig other = t.cfg;
        other.window = 5;
        CHECK_THROWS_AS(evaluate(c, mesh_file.string(), snap_file.string(), other),
                        std::invalid_argument);
    }
    fs::remove_all(dir.parent_path());
}

TEST_CASE("episode metrics serialize to stable json lines") {
    EpisodeMetrics m;
    m.episode = 3;
    m.worker = 2;
    m.steps = 14;
    m.cumulative_reward = -0.125;
    m.final_error = 0.0002;
    m.vertices_removed = 9;
    m.mean_loss = 0.75;
    m.version = 11;

    const std::string line = to_json_line(m);
    CHECK(from_json_line(line) == m);
    CHECK(line.find("\"episode\":3") != std::string::npos);

    m.mean_loss = std::numeric_limits<double>::quiet_NaN();
    const std::string null_line = to_json_line(m);
    CHECK(null_line.find("\"mean_loss\":null") != std::string::npos);
    CHECK(std::isnan(from_json_line(null_line).mean_loss));
}
