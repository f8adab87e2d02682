#pragma once

// Numerical oracles shared by the unit tests and the acceptance gate. Each
// routine returns the measured quantity; the callers own the thresholds.

#include "rlfep/ddpg.hpp"
#include "rlfep/env.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace rlfep::oracle {

// --- random tiny networks ---------------------------------------------------

void randomize(NetworkParams& p, std::mt19937_64& rng, double scale = 1.0);
Batch random_batch(std::mt19937_64& rng, int m);
/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
double rel_error(const std::vector<double>& a, const std::vector<double>& b);

/// Central differences of f over every parameter of p.
template <class F>
std::vector<double> numeric_gradient(NetworkParams p, F f, double h = 1e-6) {
    std::vector<double> theta = p.flatten();
    std::vector<double> g(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double keep = theta[i];
        theta[i] = keep + h;
        p.unflatten(theta);
        const double up = f(p);
        theta[i] = keep - h;
        p.unflatten(theta);
        const double down = f(p);
        theta[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Relative error of each trial's analytic gradient against central differences.
std::vector<double> critic_gradient_errors(int trials, std::uint64_t seed);
std::vector<double> actor_gradient_errors(int trials, std::uint64_t seed, double preactivation_penalty = 0.0);

// --- physics ------------------------------------------------------------------

struct Conservation {
    double momentum_rel = 0.0;  // max relative drift of |J w|
    double energy_rel = 0.0;    // max relative drift of 0.5 w'Jw
};

/// Torque-free spin with J = diag(1, 2, 3), w0 = (0.1, 0.2, 0.3).
Conservation torque_free_drift(double duration = 10.0, double dt = 0.002);

/// err(dt) / err(dt / 2) over 1 s of a smooth forced trajectory.
double rk4_convergence_ratio(double dt = 0.01);

/// Largest trim residual at the default flight condition.
double nominal_trim_residual();

// --- controller ------------------------------------------------------------------

/// Max |g (delta - delta0) - (wdot_c - wdot_0)| over random cases.
double indi_inverse_max_error(int cases, std::uint64_t seed);

struct StepResponse {
    double steady_error = 0.0;  // deg/s, |mean q over the last second - command|
    double settling_time = 0.0; // s, last exit from the +-5 % band
    double peak = 0.0;          // deg/s
};

/// Closed-loop rate-loop response to a constant pitch-rate command from trim.
StepResponse pitch_rate_step(double q_cmd_deg_s = 5.0, double duration = 10.0);

// --- reward -------------------------------------------------------------------------

struct Check {
    std::string name;
    double got = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;  // 0 = exact
    bool ok() const;
};

/// Every tabulated example of the reward terms, penalty and termination.
std::vector<Check> reward_examples();

// --- agent mechanics ------------------------------------------------------------

/// Max elementwise error of k soft updates against the closed-form blend.
double soft_update_closed_form_error(int k, double tau, std::uint64_t seed);

/// Largest |count - mean| / sigma over buffer indices for `draws` sampled
/// indices in mini-batches of `batch` from a buffer of `size`.
double replay_max_z(std::size_t size, std::size_t draws, std::size_t batch, std::uint64_t seed);

/// Empirical std of exploratory minus deterministic actions.
double exploration_noise_std(int draws, double variance, std::uint64_t seed);

/// Parameter hash after `steps` environment steps of seeded training.
std::uint64_t seeded_training_hash(int steps, std::uint64_t seed);

}  // namespace rlfep::oracle
