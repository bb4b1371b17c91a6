#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshdqn/dqn.hpp"

namespace meshdqn {

/// Everything needed to resume or evaluate a training run.
struct Checkpoint {
    QNetworkConfig net;
    AdamConfig adam;
    double gamma = 1.0;
    bool updating_a = true;

    long episodes = 0;
    long env_steps = 0;
    long train_steps = 0;
    long version = 0;

    std::string rng_state;  // server rng, decimal mt19937_64 serialization

    std::vector<Tensor> params_a, params_b;
    long t_a = 0, t_b = 0;
    std::vector<Tensor> m_a, v_a, m_b, v_b;
};

namespace detail {

constexpr char kCheckpointMagic[8] = {'M', 'D', 'Q', 'N', 'C', 'K', 'P', '1'};

inline void write_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}
inline std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}
inline void write_f64(std::ostream& out, double v) {
    write_u64(out, std::bit_cast<std::uint64_t>(v));
}
inline double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

inline void write_tensor(std::ostream& out, const Tensor& t) {
    write_u64(out, static_cast<std::uint64_t>(t.rows));
    write_u64(out, static_cast<std::uint64_t>(t.cols));
    for (double v : t.data) write_f64(out, v);
}
inline Tensor read_tensor(std::istream& in) {
    const auto rows = static_cast<int>(read_u64(in));
    const auto cols = static_cast<int>(read_u64(in));
    if (rows < 0 || cols < 0 || static_cast<long long>(rows) * cols > (1ll << 32))
        throw std::runtime_error("checkpoint: implausible tensor shape");
    Tensor t(rows, cols);
    for (double& v : t.data) v = read_f64(in);
    return t;
}
inline void write_tensors(std::ostream& out, const std::vector<Tensor>& ts) {
    write_u64(out, ts.size());
    for (const Tensor& t : ts) write_tensor(out, t);
}
inline std::vector<Tensor> read_tensors(std::istream& in) {
    const auto n = read_u64(in);
    if (n > (1u << 20)) throw std::runtime_error("checkpoint: implausible tensor count");
    std::vector<Tensor> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(read_tensor(in));
    return out;
}
inline void write_string(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline std::string read_string(std::istream& in) {
    const auto n = read_u64(in);
    if (n > (1u << 20)) throw std::runtime_error("checkpoint: implausible string length");
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return s;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint file " + path);
    using namespace detail;
    out.write(kCheckpointMagic, 8);
    write_u64(out, static_cast<std::uint64_t>(c.net.in_features));
    write_u64(out, static_cast<std::uint64_t>(c.net.width));
    write_u64(out, static_cast<std::uint64_t>(c.net.n_actions));
    write_u64(out, static_cast<std::uint64_t>(c.net.sage_layers));
    write_u64(out, static_cast<std::uint64_t>(c.net.gcn_layers));
    write_f64(out, c.net.topk_ratio);
    write_f64(out, c.net.init_gain);
    write_f64(out, c.adam.lr);
    write_f64(out, c.adam.beta1);
    write_f64(out, c.adam.beta2);
    write_f64(out, c.adam.eps);
    write_f64(out, c.gamma);
    write_u64(out, c.updating_a ? 1 : 0);
    write_u64(out, static_cast<std::uint64_t>(c.episodes));
    write_u64(out, static_cast<std::uint64_t>(c.env_steps));
    write_u64(out, static_cast<std::uint64_t>(c.train_steps));
    write_u64(out, static_cast<std::uint64_t>(c.version));
    write_string(out, c.rng_state);
    write_tensors(out, c.params_a);
    write_tensors(out, c.params_b);
    write_u64(out, static_cast<std::uint64_t>(c.t_a));
    write_tensors(out, c.m_a);
    write_tensors(out, c.v_a);
    write_u64(out, static_cast<std::uint64_t>(c.t_b));
    write_tensors(out, c.m_b);
    write_tensors(out, c.v_b);
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint file " + path);
    using namespace detail;
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    Checkpoint c;
    c.net.in_features = static_cast<int>(read_u64(in));
    c.net.width = static_cast<int>(read_u64(in));
    c.net.n_actions = static_cast<int>(read_u64(in));
    c.net.sage_layers = static_cast<int>(read_u64(in));
    c.net.gcn_layers = static_cast<int>(read_u64(in));
    c.net.topk_ratio = read_f64(in);
    c.net.init_gain = read_f64(in);
    c.adam.lr = read_f64(in);
    c.adam.beta1 = read_f64(in);
    c.adam.beta2 = read_f64(in);
    c.adam.eps = read_f64(in);
    c.gamma = read_f64(in);
    c.updating_a = read_u64(in) != 0;
    c.episodes = static_cast<long>(read_u64(in));
    c.env_steps = static_cast<long>(read_u64(in));
    c.train_steps = static_cast<long>(read_u64(in));
    c.version = static_cast<long>(read_u64(in));
    c.rng_state = read_string(in);
    c.params_a = read_tensors(in);
    c.params_b = read_tensors(in);
    c.t_a = static_cast<long>(read_u64(in));
    c.m_a = read_tensors(in);
    c.v_a = read_tensors(in);
    c.t_b = static_cast<long>(read_u64(in));
    c.m_b = read_tensors(in);
    c.v_b = read_tensors(in);
    return c;
}

inline std::string serialize_rng(const std::mt19937_64& rng) {
    std::ostringstream ss;
    ss << rng;
    return ss.str();
}
inline std::mt19937_64 deserialize_rng(const std::string& state) {
    std::mt19937_64 rng;
    if (!state.empty()) {
        std::istringstream ss(state);
        ss >> rng;
        if (ss.fail()) throw std::runtime_error("checkpoint: bad rng state");
    }
    return rng;
}

inline void assign_parameters(QNetwork& net, const std::vector<Tensor>& values) {
    const std::vector<Tensor*> dst = net.parameters();
    if (dst.size() != values.size())
        throw std::invalid_argument("checkpoint: parameter count mismatch");
    for (size_t i = 0; i < dst.size(); ++i) {
        if (dst[i]->rows != values[i].rows || dst[i]->cols != values[i].cols)
            throw std::invalid_argument("checkpoint: parameter shape mismatch");
        *dst[i] = values[i];
    }
}

inline std::vector<Tensor> copy_parameters(const QNetwork& net) {
    std::vector<Tensor> out;
    for (const Tensor* t : net.parameters()) out.push_back(*t);
    return out;
}

inline Checkpoint make_checkpoint(const DqnAgent& agent) {
    Checkpoint c;
    c.net = agent.a.cfg;
    c.adam = agent.opt_a.config();
    c.gamma = agent.gamma;
    c.updating_a = agent.updating_a;
    c.params_a = copy_parameters(agent.a);
    c.params_b = copy_parameters(agent.b);
    c.t_a = agent.opt_a.step_count();
    c.m_a = agent.opt_a.first_moments();
    c.v_a = agent.opt_a.second_moments();
    c.t_b = agent.opt_b.step_count();
    c.m_b = agent.opt_b.first_moments();
    c.v_b = agent.opt_b.second_moments();
    return c;
}

inline DqnAgent restore_agent(const Checkpoint& c) {
    DqnAgent agent = DqnAgent::init(c.net, 0, c.adam, c.gamma);
    agent.updating_a = c.updating_a;
    assign_parameters(agent.a, c.params_a);
    assign_parameters(agent.b, c.params_b);
    agent.opt_a.load_state(c.t_a, c.m_a, c.v_a);
    agent.opt_b.load_state(c.t_b, c.m_b, c.v_b);
    return agent;
}

}  // namespace meshdqn
