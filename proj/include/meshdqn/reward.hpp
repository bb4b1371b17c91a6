#pragma once

#include <cmath>
#include <stdexcept>

#include "meshdqn/flow.hpp"

namespace meshdqn {

/// Shaping constants for the per-step reward.
///
/// The property reward is 2*exp(-K*error) - 1, calibrated so that an error of
/// zero_reward_error lands exactly on 0. Keep K and zero_reward_error in sync
/// (validate() checks the calibration identity).
struct RewardConfig {
    double zero_reward_error = 0.0005;
    double K = std::log(2.0) / 0.0005;
    double error_threshold = 0.001;
    double time_factor = 0.005;
    double broken_penalty = -1.0;

    static RewardConfig with_zero_error(double zre) {
        RewardConfig cfg;
        cfg.zero_reward_error = zre;
        cfg.K = std::log(2.0) / zre;
        cfg.validate();
        return cfg;
    }

    void validate() const {
        if (!(zero_reward_error > 0.0) || zero_reward_error > error_threshold)
            throw std::invalid_argument("reward: need 0 < zero_reward_error <= error_threshold");
        if (std::abs(2.0 * std::exp(-K * zero_reward_error) - 1.0) > 1e-12)
            throw std::invalid_argument("reward: K is not calibrated to zero_reward_error");
        if (time_factor < 0.0) throw std::invalid_argument("reward: negative time_factor");
    }
};

/// Relative property deviation: the L2 norm of per-snapshot relative errors,
/// normalized by sqrt(n) so a uniform per-snapshot error e maps to exactly e.
inline double property_error(const PropertyVector& gt, const PropertyVector& now) {
    if (gt.values.size() != now.values.size() || gt.values.empty())
        throw std::invalid_argument("property_error: length mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < gt.values.size(); ++i) {
        if (gt.values[i] == 0.0)
            throw std::invalid_argument("property_error: zero ground-truth entry");
        const double rel = (gt.values[i] - now.values[i]) / gt.values[i];
        acc += rel * rel;
    }
    return std::sqrt(acc / static_cast<double>(gt.values.size()));
}

enum class StepOutcome { Ok, Broken };

struct RewardResult {
    double value = 0.0;
    bool done = false;
};

inline RewardResult reward(StepOutcome outcome, double error, int n_removed_total,
                           const RewardConfig& cfg) {
    cfg.validate();
    if (outcome == StepOutcome::Broken) return {cfg.broken_penalty, true};
    if (!(error >= 0.0)) throw std::invalid_argument("reward: negative or NaN error");
    const double r_property = 2.0 * std::exp(-cfg.K * error) - 1.0;
    const double r_time = cfg.time_factor * static_cast<double>(n_removed_total);
    return {r_property + r_time, error > cfg.error_threshold};
}

}  // namespace meshdqn
