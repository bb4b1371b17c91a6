#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "meshdqn/dqn.hpp"
#include "meshdqn/env.hpp"
#include "meshdqn/optim.hpp"
#include "meshdqn/qnetwork.hpp"

namespace meshdqn {

/// Every knob of a training or evaluation run. Defaults are the reference
/// hyperparameters; an empty config file reproduces them exactly.
struct RunConfig {
    std::string mesh_file;
    std::string snapshot_file;
    std::string out_dir = "out";

    int window = 180;
    double removal_fraction = 0.05;
    double error_threshold = 0.001;
    int smoothing_iterations = 50;
    int max_offset = 20;
    int snapshot_count = 5;
    int velocity_order = 2;
    std::string body = "airfoil";

    double zero_reward_error = 0.0005;
    double time_factor = 0.005;

    int width = 128;
    int sage_layers = 3;
    int gcn_layers = 3;
    double topk_ratio = 0.5;

    double lr = 0.0005;
    double gamma = 1.0;
    double init_gain = 0.9;
    int workers = 14;
    long episodes = 1000;
    unsigned long long seed = 0;
    double epsilon_start = 1.0;
    double epsilon_finish = 0.05;
    long epsilon_decay_steps = 10000;
    int swap_cadence = 5;
    int batch_size = 32;
    int replay_capacity = 50000;
    int warmup_transitions = 500;
    long checkpoint_every = 200;

    std::string property = "drag";

    double density = 1.0;
    double viscosity = 0.001;

    BoundaryTag body_tag() const {
        if (body == "airfoil") return BoundaryTag::Airfoil;
        if (body == "wall") return BoundaryTag::Wall;
        if (body == "inlet") return BoundaryTag::Inlet;
        if (body == "outlet") return BoundaryTag::Outlet;
        throw std::invalid_argument("config: unknown body tag '" + body + "'");
    }
    Vec2 direction() const {
        if (property == "drag") return {1.0, 0.0};
        if (property == "lift") return {0.0, 1.0};
        throw std::invalid_argument("config: property must be drag or lift");
    }
    EnvConfig env_config() const {
        EnvConfig e;
        e.window = window;
        e.removal_fraction = removal_fraction;
        e.smoothing_iterations = smoothing_iterations;
        e.max_offset = max_offset;
        e.reward = RewardConfig::with_zero_error(zero_reward_error);
        e.reward.error_threshold = error_threshold;
        e.reward.time_factor = time_factor;
        e.direction = direction();
        e.body_tag = body_tag();
        e.fluid.density = density;
        e.fluid.viscosity = viscosity;
        return e;
    }
    QNetworkConfig qnetwork_config(int n_snapshots) const {
        QNetworkConfig q;
        q.in_features = 2 + 3 * n_snapshots;
        q.width = width;
        q.n_actions = window + 1;
        q.sage_layers = sage_layers;
        q.gcn_layers = gcn_layers;
        q.topk_ratio = topk_ratio;
        q.init_gain = init_gain;
        return q;
    }
    AdamConfig adam_config() const { return {lr, 0.9, 0.999, 1e-8}; }
    EpsilonSchedule epsilon_schedule() const {
        return {epsilon_start, epsilon_finish, epsilon_decay_steps};
    }

    void validate() const {
        env_config().validate();
        qnetwork_config(snapshot_count).validate();
        if (snapshot_count < 1) throw std::invalid_argument("config: snapshot_count < 1");
        if (velocity_order != 1 && velocity_order != 2)
            throw std::invalid_argument("config: velocity_order must be 1 or 2");
        if (lr <= 0.0) throw std::invalid_argument("config: lr must be positive");
        if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("config: gamma outside [0,1]");
        if (workers < 1) throw std::invalid_argument("config: workers < 1");
        if (episodes < 0) throw std::invalid_argument("config: negative episode budget");
        if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_finish < 0.0 ||
            epsilon_finish > 1.0 || epsilon_decay_steps < 0)
            throw std::invalid_argument("config: bad epsilon schedule");
        if (swap_cadence < 1) throw std::invalid_argument("config: swap_cadence < 1");
        if (batch_size < 1) throw std::invalid_argument("config: batch_size < 1");
        if (replay_capacity < batch_size)
            throw std::invalid_argument("config: replay smaller than a batch");
        if (warmup_transitions < 0) throw std::invalid_argument("config: negative warmup");
        if (checkpoint_every < 1) throw std::invalid_argument("config: checkpoint_every < 1");
    }
};

namespace detail {

struct ConfigField {
    const char* section;
    const char* key;
    std::variant<int*, long*, double*, std::string*, unsigned long long*> ref;
};

inline std::vector<ConfigField> config_fields(RunConfig& c) {
    return {
        {"paths", "mesh_file", &c.mesh_file},
        {"paths", "snapshot_file", &c.snapshot_file},
        {"paths", "out_dir", &c.out_dir},
        {"environment", "window", &c.window},
        {"environment", "removal_fraction", &c.removal_fraction},
        {"environment", "error_threshold", &c.error_threshold},
        {"environment", "smoothing_iterations", &c.smoothing_iterations},
        {"environment", "max_offset", &c.max_offset},
        {"environment", "snapshot_count", &c.snapshot_count},
        {"environment", "velocity_order", &c.velocity_order},
        {"environment", "body", &c.body},
        {"reward", "zero_reward_error", &c.zero_reward_error},
        {"reward", "time_factor", &c.time_factor},
        {"network", "width", &c.width},
        {"network", "sage_layers", &c.sage_layers},
        {"network", "gcn_layers", &c.gcn_layers},
        {"network", "topk_ratio", &c.topk_ratio},
        {"training", "lr", &c.lr},
        {"training", "gamma", &c.gamma},
        {"training", "init_gain", &c.init_gain},
        {"training", "workers", &c.workers},
        {"training", "episodes", &c.episodes},
        {"training", "seed", &c.seed},
        {"training", "epsilon_start", &c.epsilon_start},
        {"training", "epsilon_finish", &c.epsilon_finish},
        {"training", "epsilon_decay_steps", &c.epsilon_decay_steps},
        {"training", "swap_cadence", &c.swap_cadence},
        {"training", "batch_size", &c.batch_size},
        {"training", "replay_capacity", &c.replay_capacity},
        {"training", "warmup_transitions", &c.warmup_transitions},
        {"training", "checkpoint_every", &c.checkpoint_every},
        {"property", "property", &c.property},
        {"fluid", "density", &c.density},
        {"fluid", "viscosity", &c.viscosity},
    };
}

inline std::string format_config_value(const ConfigField& f) {
    char buf[64];
    if (auto* p = std::get_if<int*>(&f.ref)) {
        std::snprintf(buf, sizeof(buf), "%d", **p);
    } else if (auto* p = std::get_if<long*>(&f.ref)) {
        std::snprintf(buf, sizeof(buf), "%ld", **p);
    } else if (auto* p = std::get_if<double*>(&f.ref)) {
        std::snprintf(buf, sizeof(buf), "%.17g", **p);
    } else if (auto* p = std::get_if<unsigned long long*>(&f.ref)) {
        std::snprintf(buf, sizeof(buf), "%llu", **p);
    } else {
        return *std::get<std::string*>(f.ref);
    }
    return buf;
}

inline void parse_config_value(const ConfigField& f, const std::string& value, int line) {
    try {
        size_t used = 0;
        if (auto* p = std::get_if<int*>(&f.ref)) {
            **p = std::stoi(value, &used);
        } else if (auto* p = std::get_if<long*>(&f.ref)) {
            **p = std::stol(value, &used);
        } else if (auto* p = std::get_if<double*>(&f.ref)) {
            **p = std::stod(value, &used);
        } else if (auto* p = std::get_if<unsigned long long*>(&f.ref)) {
            **p = std::stoull(value, &used);
        } else {
            *std::get<std::string*>(f.ref) = value;
            return;
        }
        if (used != value.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
        throw std::invalid_argument("config line " + std::to_string(line) + ": bad value '" +
                                    value + "' for " + f.section + "." + f.key);
    }
}

inline std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

inline std::string to_config_text(const RunConfig& cfg) {
    auto fields = detail::config_fields(const_cast<RunConfig&>(cfg));
    std::ostringstream out;
    std::string section;
    for (const auto& f : fields) {
        if (section != f.section) {
            if (!section.empty()) out << "\n";
            section = f.section;
            out << "[" << section << "]\n";
        }
        out << f.key << " = " << detail::format_config_value(f) << "\n";
    }
    return out.str();
}

/// Parse key/value overrides on top of the defaults; unknown sections or keys
/// are errors, missing ones keep their default.
inline RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    auto fields = detail::config_fields(cfg);
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unterminated section header");
            section = detail::trim(t.substr(1, t.size() - 2));
            continue;
        }
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        bool found = false;
        for (const auto& f : fields) {
            if (section == f.section && key == f.key) {
                detail::parse_config_value(f, value, line_no);
                found = true;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + section + "." + key + "'");
    }
    return cfg;
}

inline void save_config(const std::string& path, const RunConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write config file " + path);
    out << to_config_text(cfg);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace meshdqn
