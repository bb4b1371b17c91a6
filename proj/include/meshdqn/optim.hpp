#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "meshdqn/tensor.hpp"

namespace meshdqn {

/// Entries ~ Normal(0, gain^2 * 2 / (fan_in + fan_out)); deterministic for a
/// fixed generator state.
inline Tensor xavier_normal_init(int rows, int cols, double gain, std::mt19937_64& rng) {
    Tensor t(rows, cols);
    const double std_dev = gain * std::sqrt(2.0 / (rows + cols));
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& v : t.data) v = std_dev * dist(rng);
    return t;
}

struct AdamConfig {
    double lr = 0.0005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Standard Adam with bias correction, no weight decay.
class Adam {
  public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads) {
        if (params.size() != grads.size())
            throw std::invalid_argument("adam: parameter/gradient count mismatch");
        if (m_.empty()) {
            for (const Tensor* p : params) {
                m_.emplace_back(p->rows, p->cols);
                v_.emplace_back(p->rows, p->cols);
            }
        }
        if (m_.size() != params.size()) throw std::invalid_argument("adam: parameter set changed");
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (size_t i = 0; i < params.size(); ++i) {
            Tensor& p = *params[i];
            const Tensor& g = *grads[i];
            if (!p.same_shape(g)) throw std::invalid_argument("adam: gradient shape mismatch");
            for (size_t k = 0; k < p.size(); ++k) {
                m_[i].data[k] = cfg_.beta1 * m_[i].data[k] + (1.0 - cfg_.beta1) * g.data[k];
                v_[i].data[k] =
                    cfg_.beta2 * v_[i].data[k] + (1.0 - cfg_.beta2) * g.data[k] * g.data[k];
                const double mhat = m_[i].data[k] / bc1;
                const double vhat = v_[i].data[k] / bc2;
                p.data[k] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

    long step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    const std::vector<Tensor>& first_moments() const { return m_; }
    const std::vector<Tensor>& second_moments() const { return v_; }

    /// Restore state from a checkpoint.
    void load_state(long t, std::vector<Tensor> m, std::vector<Tensor> v) {
        t_ = t;
        m_ = std::move(m);
        v_ = std::move(v);
    }

  private:
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

}  // namespace meshdqn
