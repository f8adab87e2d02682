#pragma once

#include "rlfep/protection.hpp"

#include <array>
#include <limits>

namespace rlfep {

/// Weights of the shaped reward. Costs r_t >= 0 and r_a, r_n, r_q <= 0, so
/// the default W_t is negative and the envelope weights positive.
struct RewardWeights {
    double survival = 0.1;   // r_s
    double tracking = -1.0;  // W_t
    double alpha = 10.0;     // W_a
    double nz = 10.0;        // W_n
    double q = 10.0;         // W_q
    double epsilon = 1e-6;   // rad/s, tracking-cost denominator guard
    double sustained_penalty = -400.0;
    double excess_penalty = -600.0;
    double integrity_penalty = -600.0;
    double sustain_time = 2.0;     // s, both for the penalty and the failure metric
    double excess_fraction = 0.5;  // relative exceedance that ends an episode
    /// Upper bound on the raw tracking cost r_t per step; infinity keeps the
    /// literal cost. Training sets a finite cap because r_t diverges as the
    /// commanded rate approaches zero.
    double tracking_cap = std::numeric_limits<double>::infinity();
    /// Weight of the intervention cost -(q_rest / q_max)^2. Not part of the
    /// envelope reward; training switches it on so the agent prefers leaving
    /// the pilot command alone when that costs nothing else.
    double intervention = 0.0;

    void validate() const;
};

/// ((|q| - |q_cmd|) / (|q_cmd| + eps))^2
double r_tracking(double q, double q_cmd, double epsilon = 1e-6);

/// -((|a| - 0.9 a_max) / (0.9 a_max))^2 once |a| >= 0.9 a_max, else 0.
double r_alpha(double alpha, double alpha_max);

/// -((|n| - n_max) / n_max)^2 once |n| >= n_max, else 0.
double r_nz(double nz, double nz_max);

/// -((|q| - q_max) / q_max)^2 once |q| >= q_max, else 0.
double r_q(double q, double q_max);

enum class Protected : int { alpha = 0, nz = 1, q = 2 };

/// Signed limit pair for one protected variable.
struct LimitPair {
    double upper;
    double lower;

    /// Limit applicable to the sign of x (upper for x >= 0).
    double for_value(double x) const { return x >= 0.0 ? upper : lower; }
    bool beyond(double x) const { return x > upper || x < lower; }
    /// (|x| - |L|) / |L| with L chosen by sign; negative inside the limits.
    double exceedance(double x) const;
};

/// The three protected values in consistent units (deg, g, deg/s).
struct ProtectedValues {
    double alpha_deg = 0.0;
    double nz = 0.0;
    double q_deg_s = 0.0;

    double operator[](Protected p) const;
};

std::array<LimitPair, 3> limit_pairs(const EnvelopeLimits& limits);

/// Counts consecutive steps each protected variable spends beyond its limit.
/// A counter resets on the step the variable re-enters the envelope.
class ViolationTimers {
public:
    void update(const ProtectedValues& values, const std::array<LimitPair, 3>& limits);
    void reset() { steps_.fill(0); longest_.fill(0); }

    int steps(Protected p) const { return steps_[static_cast<std::size_t>(p)]; }
    int longest(Protected p) const { return longest_[static_cast<std::size_t>(p)]; }
    std::array<int, 3> current() const { return steps_; }

private:
    std::array<int, 3> steps_{};
    std::array<int, 3> longest_{};
};

struct Penalty {
    double value = 0.0;
    bool done = false;
    bool sustained = false;  // cond_1: >= 2 variables beyond limits for sustain_time
    bool excess = false;     // cond_2: any variable beyond its limit by excess_fraction
};

/// `sustain_steps` is the sustain time expressed in agent steps. cond_2
/// dominates when both conditions hold.
Penalty penalty_and_done(const std::array<int, 3>& violation_steps, const std::array<double, 3>& exceedance,
                         int sustain_steps, const RewardWeights& weights);

struct RewardBreakdown {
    double survival = 0.0;
    double tracking = 0.0;  // raw r_t (after the optional cap)
    double alpha = 0.0;     // raw r_a
    double nz = 0.0;        // raw r_n
    double q = 0.0;         // raw r_q
    double penalty = 0.0;   // r_p
    double intervention = 0.0;  // raw intervention cost, added by the environment
    double total = 0.0;
    bool done = false;
};

/// Assembles r_s + W_t r_t + W_a r_a + W_n r_n + W_q r_q + r_p. Angles in deg,
/// rates in deg/s (the tracking term is unit-free apart from epsilon, which
/// is converted from rad/s).
RewardBreakdown reward_total(const ProtectedValues& values, double q_cmd_deg_s, const EnvelopeLimits& limits,
                             const RewardWeights& weights, const Penalty& penalty);

}  // namespace rlfep
