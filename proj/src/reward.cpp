#include "rlfep/reward.hpp"

#include <algorithm>

namespace rlfep {

void RewardWeights::validate() const {
    for (double v : {survival, tracking, alpha, nz, q, epsilon, sustained_penalty, excess_penalty,
                     integrity_penalty, sustain_time, excess_fraction}) {
        if (!std::isfinite(v)) throw ConfigError("reward weights must be finite");
    }
    if (!(epsilon > 0.0)) throw ConfigError("tracking epsilon must be positive");
    if (!(sustain_time > 0.0)) throw ConfigError("sustain_time must be positive");
    if (!(excess_fraction > 0.0)) throw ConfigError("excess_fraction must be positive");
    if (!(tracking_cap > 0.0)) throw ConfigError("tracking_cap must be positive (infinity disables it)");
    if (!(intervention >= 0.0) || !std::isfinite(intervention)) throw ConfigError("intervention weight must be >= 0");
}

double r_tracking(double q, double q_cmd, double epsilon) {
    const double e = (std::abs(q) - std::abs(q_cmd)) / (std::abs(q_cmd) + epsilon);
    return e * e;
}

double r_alpha(double alpha, double alpha_max) {
    const double threshold = 0.9 * std::abs(alpha_max);
    if (std::abs(alpha) < threshold) return 0.0;
    const double e = (std::abs(alpha) - threshold) / threshold;
    return -e * e;
}

double r_nz(double nz, double nz_max) {
    const double limit = std::abs(nz_max);
    if (std::abs(nz) < limit) return 0.0;
    const double e = (std::abs(nz) - limit) / limit;
    return -e * e;
}

double r_q(double q, double q_max) {
    const double limit = std::abs(q_max);
    if (std::abs(q) < limit) return 0.0;
    const double e = (std::abs(q) - limit) / limit;
    return -e * e;
}

double LimitPair::exceedance(double x) const {
    const double limit = std::abs(for_value(x));
    return (std::abs(x) - limit) / limit;
}

double ProtectedValues::operator[](Protected p) const {
    switch (p) {
        case Protected::alpha: return alpha_deg;
        case Protected::nz: return nz;
        case Protected::q: return q_deg_s;
    }
    return 0.0;
}

std::array<LimitPair, 3> limit_pairs(const EnvelopeLimits& limits) {
    return {LimitPair{limits.alpha_max, limits.alpha_min}, LimitPair{limits.nz_max, limits.nz_min},
            LimitPair{limits.q_max, limits.q_min}};
}

void ViolationTimers::update(const ProtectedValues& values, const std::array<LimitPair, 3>& limits) {
    for (std::size_t i = 0; i < 3; ++i) {
        const double x = values[static_cast<Protected>(i)];
        steps_[i] = limits[i].beyond(x) ? steps_[i] + 1 : 0;
        longest_[i] = std::max(longest_[i], steps_[i]);
    }
}

Penalty penalty_and_done(const std::array<int, 3>& violation_steps, const std::array<double, 3>& exceedance,
                         int sustain_steps, const RewardWeights& weights) {
    Penalty p;
    int sustained = 0;
    for (int s : violation_steps) sustained += s >= sustain_steps ? 1 : 0;
    p.sustained = sustained >= 2;
    for (double e : exceedance) p.excess = p.excess || e >= weights.excess_fraction;
    if (p.excess) {
        p.value = weights.excess_penalty;
        p.done = true;
    } else if (p.sustained) {
        p.value = weights.sustained_penalty;
        p.done = true;
    }
    return p;
}

RewardBreakdown reward_total(const ProtectedValues& values, double q_cmd_deg_s, const EnvelopeLimits& limits,
                             const RewardWeights& weights, const Penalty& penalty) {
    const auto pairs = limit_pairs(limits);
    RewardBreakdown r;
    r.survival = weights.survival;
    r.tracking = std::min(r_tracking(values.q_deg_s, q_cmd_deg_s, rad2deg(weights.epsilon)), weights.tracking_cap);
    r.alpha = r_alpha(values.alpha_deg, pairs[0].for_value(values.alpha_deg));
    r.nz = r_nz(values.nz, pairs[1].for_value(values.nz));
    r.q = r_q(values.q_deg_s, pairs[2].for_value(values.q_deg_s));
    r.penalty = penalty.value;
    r.done = penalty.done;
    r.total = r.survival + weights.tracking * r.tracking + weights.alpha * r.alpha + weights.nz * r.nz +
              weights.q * r.q + r.penalty;
    return r;
}

}  // namespace rlfep
