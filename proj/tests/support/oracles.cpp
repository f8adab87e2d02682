#include "oracles.hpp"

#include "rlfep/config.hpp"
#include "rlfep/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rlfep::oracle {

void randomize(NetworkParams& p, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> n(0.0, scale);
    for (auto& l : p.layers) {
        for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = n(rng);
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = n(rng);
    }
}

Batch random_batch(std::mt19937_64& rng, int m) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Batch b(static_cast<std::size_t>(m));
    for (auto& t : b) {
        for (auto& v : t.s) v = u(rng);
        for (auto& v : t.s_next) v = u(rng);
        t.a = u(rng);
        t.r = u(rng);
        t.done = u(rng) > 0.5;
    }
    return b;
}

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double scale = std::max(std::sqrt(na), std::sqrt(nb));
    if (scale < 1e-12) return 0.0;
    return std::sqrt(diff) / scale;
}

std::vector<double> critic_gradient_errors(int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> batch_size(1, 6);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> out;
    for (int trial = 0; trial < trials; ++trial) {
        NetworkParams critic = make_critic(kObsDim, 5, 3, 3, rng);
        randomize(critic, rng);
        const Batch batch = random_batch(rng, batch_size(rng));
        std::vector<double> y(batch.size());
        for (auto& v : y) v = u(rng);
        NetworkParams grad;
        critic_loss(critic, batch, y, &grad);
        const auto numeric = numeric_gradient(critic, [&](const NetworkParams& p) { return critic_loss(p, batch, y); });
        out.push_back(rel_error(grad.flatten(), numeric));
    }
    return out;
}

std::vector<double> actor_gradient_errors(int trials, std::uint64_t seed, double preactivation_penalty) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> batch_size(1, 6);
    std::vector<double> out;
    for (int trial = 0; trial < trials; ++trial) {
        NetworkParams actor = make_actor(kObsDim, 4, rng);
        NetworkParams critic = make_critic(kObsDim, 5, 3, 3, rng);
        randomize(actor, rng, 0.7);
        randomize(critic, rng);
        const Batch batch = random_batch(rng, batch_size(rng));
        NetworkParams grad;
        actor_objective(actor, critic, batch, &grad, preactivation_penalty);
        const auto numeric = numeric_gradient(
            actor, [&](const NetworkParams& p) { return actor_objective(p, critic, batch, nullptr, preactivation_penalty); });
        out.push_back(rel_error(grad.flatten(), numeric));
    }
    return out;
}

Conservation torque_free_drift(double duration, double dt) {
    MassProperties mp;
    mp.mass = 1.0;
    mp.inertia = Vec3(1.0, 2.0, 3.0).asDiagonal();
    AircraftState s;
    s.velocity_body = Vec3(100.0, 0.0, 0.0);
    s.omega = Vec3(0.1, 0.2, 0.3);
    const double h0 = (mp.inertia * s.omega).norm();
    const double e0 = 0.5 * s.omega.dot(mp.inertia * s.omega);
    Conservation c;
    const int n = static_cast<int>(std::lround(duration / dt));
    for (int i = 0; i < n; ++i) {
        s = step(s, Wrench{}, mp, dt);
        const double h = (mp.inertia * s.omega).norm();
        const double e = 0.5 * s.omega.dot(mp.inertia * s.omega);
        c.momentum_rel = std::max(c.momentum_rel, std::abs(h - h0) / h0);
        c.energy_rel = std::max(c.energy_rel, std::abs(e - e0) / e0);
    }
    return c;
}

namespace {

// Smooth, state-dependent wrench keeping the trajectory well away from the
// kinematic singularity.
Wrench forced_wrench(const AircraftState& s) {
    Wrench w;
    w.force = Vec3(-2.0 * s.velocity_body.x() + 150.0, 30.0 * std::sin(s.euler.x()), -4.0 * s.velocity_body.z());
    w.moment = Vec3(0.4 - 0.5 * s.omega.x(), 0.3 * std::cos(s.euler.y()) - 0.8 * s.omega.y(),
                    -0.6 * s.omega.z() + 0.1 * std::sin(s.euler.x()));
    return w;
}

Eigen::Matrix<double, 12, 1> flatten_state(const AircraftState& s) {
    Eigen::Matrix<double, 12, 1> v;
    v << s.velocity_body, s.omega, s.euler, s.position_ned;
    return v;
}

Eigen::Matrix<double, 12, 1> integrate_forced(double dt, double duration) {
    MassProperties mp;
    mp.mass = 50.0;
    mp.inertia = Vec3(1.0, 2.0, 2.5).asDiagonal();
    IntegratorOptions opt;
    opt.max_dt = 1.0;
    AircraftState s;
    s.velocity_body = Vec3(80.0, 1.0, 4.0);
    s.omega = Vec3(0.3, -0.2, 0.1);
    s.euler = Vec3(0.1, 0.05, 0.0);
    const int n = static_cast<int>(std::lround(duration / dt));
    for (int i = 0; i < n; ++i) s = step(s, WrenchFunction(forced_wrench), mp, dt, opt);
    return flatten_state(s);
}

}  // namespace

double rk4_convergence_ratio(double dt) {
    const auto reference = integrate_forced(dt / 64.0, 1.0);
    const double coarse = (integrate_forced(dt, 1.0) - reference).norm();
    const double fine = (integrate_forced(dt / 2.0, 1.0) - reference).norm();
    return coarse / fine;
}

double nominal_trim_residual() {
    const WorkbenchConfig cfg = WorkbenchConfig::defaults();
    const auto vehicle = build_vehicle(cfg);
    const TrimResult t = trim_level_flight(*vehicle, cfg.env.trim_mach, cfg.env.trim_altitude);
    return t.residuals.cwiseAbs().maxCoeff();
}

double indi_inverse_max_error(int cases, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> scale(0.5, 50.0);
    double worst = 0.0;
    int done = 0;
    while (done < cases) {
        Mat3 g;
        for (int i = 0; i < 9; ++i) g.data()[i] = u(rng);
        g *= scale(rng);
        Vec3 wdot_c, wdot_0, delta0;
        for (int i = 0; i < 3; ++i) {
            wdot_c(i) = 5.0 * u(rng);
            wdot_0(i) = 5.0 * u(rng);
            delta0(i) = 20.0 * u(rng);
        }
        Vec3 delta;
        try {
            delta = indi_law(wdot_c, wdot_0, g, delta0, 1e4);
        } catch (const ControllerError&) {
            continue;  // ill-conditioned draw; a different property
        }
        const Vec3 lhs = g * ((delta - delta0) * kDegToRad);
        worst = std::max(worst, (lhs - (wdot_c - wdot_0)).cwiseAbs().maxCoeff());
        ++done;
    }
    return worst;
}

StepResponse pitch_rate_step(double q_cmd_deg_s, double duration) {
    WorkbenchConfig cfg = WorkbenchConfig::defaults();
    EnvConfig ec = cfg.env;
    ec.mode = ProtectionMode::none;
    ec.duration = duration;
    ec.profile = CommandProfile::constant(0.0, q_cmd_deg_s, 0.0, duration);
    ec.random_pitch_command = false;
    ProtectionEnv env(build_vehicle(cfg), ec);
    env.reset();
    std::vector<double> t, q;
    while (!env.done()) {
        env.step(0.0);
        t.push_back(env.time());
        q.push_back(env.protected_values().q_deg_s);
    }
    StepResponse r;
    const double band = 0.05 * std::abs(q_cmd_deg_s);
    double tail_sum = 0.0;
    int tail_n = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        r.peak = std::max(r.peak, q[i]);
        if (std::abs(q[i] - q_cmd_deg_s) > band) r.settling_time = t[i];
        if (t[i] > t.back() - 1.0) {
            tail_sum += q[i];
            ++tail_n;
        }
    }
    r.steady_error = std::abs(tail_sum / tail_n - q_cmd_deg_s);
    return r;
}

bool Check::ok() const {
    if (tolerance == 0.0) return got == expected;
    return std::abs(got - expected) <= tolerance;
}

std::vector<Check> reward_examples() {
    std::vector<Check> c;
    const double tol = 1e-12;
    // Tracking cost. With the guard set to zero the direct evaluation is
    // exact; with the default guard the deviation is the guard itself.
    c.push_back({"r_t(q = q_cmd)", r_tracking(7.5, 7.5), 0.0, 0.0});
    c.push_back({"r_t(0, 10) without guard", r_tracking(0.0, 10.0, 0.0), 1.0, tol});
    c.push_back({"r_t(20, 10) without guard", r_tracking(20.0, 10.0, 0.0), 1.0, tol});
    c.push_back({"r_t(-20, 10) without guard", r_tracking(-20.0, 10.0, 0.0), 1.0, tol});
    {
        const double eps = rad2deg(1e-6);
        const double expect = std::pow(10.0 / (10.0 + eps), 2);
        c.push_back({"r_t(0, 10) default guard", r_tracking(0.0, 10.0, eps), expect, tol});
    }
    c.push_back({"r_t sign flip", r_tracking(-3.0, -8.0), r_tracking(3.0, 8.0), 0.0});
    // Angle of attack.
    c.push_back({"r_a(0.89 max)", r_alpha(0.89 * 25.0, 25.0), 0.0, 0.0});
    c.push_back({"r_a(0.9 max)", r_alpha(0.9 * 25.0, 25.0), 0.0, 0.0});
    c.push_back({"r_a(max)", r_alpha(25.0, 25.0), -1.0 / 81.0, tol});
    c.push_back({"r_a(-max)", r_alpha(-25.0, 25.0), -1.0 / 81.0, tol});
    // Load factor.
    c.push_back({"r_n(max)", r_nz(9.0, 9.0), 0.0, 0.0});
    c.push_back({"r_n(2 max)", r_nz(18.0, 9.0), -1.0, tol});
    c.push_back({"r_n(0)", r_nz(0.0, 9.0), 0.0, 0.0});
    // Pitch rate.
    c.push_back({"r_q(max)", r_q(30.0, 30.0), 0.0, 0.0});
    c.push_back({"r_q(1.5 max)", r_q(45.0, 30.0), -0.25, tol});
    c.push_back({"r_q(0)", r_q(0.0, 30.0), 0.0, 0.0});

    // Penalty and termination, with 100 Hz agent steps (200 = 2 s).
    const RewardWeights w;
    const int sustain = 200;
    {
        const Penalty p = penalty_and_done({200, 0, 200}, {0.1, -0.5, 0.1}, sustain, w);
        c.push_back({"cond1 alpha+q 2.0 s penalty", p.value, -400.0, 0.0});
        c.push_back({"cond1 done", p.done ? 1.0 : 0.0, 1.0, 0.0});
    }
    {
        const Penalty p = penalty_and_done({0, 1, 0}, {-0.5, 0.5, -0.5}, sustain, w);
        c.push_back({"cond2 nz 1.5 max penalty", p.value, -600.0, 0.0});
        c.push_back({"cond2 done", p.done ? 1.0 : 0.0, 1.0, 0.0});
    }
    {
        const Penalty p = penalty_and_done({250, 0, 250}, {0.6, -0.5, 0.2}, sustain, w);
        c.push_back({"cond2 dominates cond1", p.value, -600.0, 0.0});
    }
    {
        const Penalty p = penalty_and_done({190, 0, 0}, {0.2, -0.5, -0.5}, sustain, w);
        c.push_back({"single variable 1.9 s penalty", p.value, 0.0, 0.0});
        c.push_back({"single variable 1.9 s continues", p.done ? 1.0 : 0.0, 0.0, 0.0});
    }
    {
        const Penalty p = penalty_and_done({199, 0, 250}, {0.2, -0.5, 0.2}, sustain, w);
        c.push_back({"second variable 1.99 s continues", p.done ? 1.0 : 0.0, 0.0, 0.0});
    }

    // Assembled reward.
    const EnvelopeLimits lim;
    {
        const RewardBreakdown r = reward_total({5.0, 1.0, 10.0}, 10.0, lim, w, {});
        c.push_back({"perfect tracking inside envelope", r.total, 0.1, 0.0});
    }
    {
        Penalty p;
        p.value = -600.0;
        p.done = true;
        p.excess = true;
        const RewardBreakdown r = reward_total({5.0, 13.5, 10.0}, 10.0, lim, w, p);
        c.push_back({"cond2 adds -600", r.penalty, -600.0, 0.0});
        c.push_back({"cond2 sets done", r.done ? 1.0 : 0.0, 1.0, 0.0});
    }
    {
        // alpha 25 (r_a = -1/81), nz 13.5 (r_n = -1/4), q 45 against 30 (r_t = 1/4, r_q = -1/4)
        const RewardBreakdown r = reward_total({25.0, 13.5, 45.0}, 30.0, lim, w, {});
        const double hand = 0.1 - 1.0 * std::pow(15.0 / (30.0 + rad2deg(1e-6)), 2) + 10.0 * (-1.0 / 81.0) +
                            10.0 * (-0.25) + 10.0 * (-0.25);
        c.push_back({"additivity of the six terms", r.total, hand, tol});
    }
    {
        // Negative side uses the negative limits: q = -15 against q_min = -10.
        const RewardBreakdown r = reward_total({0.0, 1.0, -15.0}, -15.0, lim, w, {});
        c.push_back({"negative pitch-rate limit", r.q, -0.25, tol});
    }
    return c;
}

double soft_update_closed_form_error(int k, double tau, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    NetworkParams online = make_critic(kObsDim, 8, 4, 4, rng);
    NetworkParams target = online;
    randomize(online, rng);
    randomize(target, rng);
    const auto theta = online.flatten();
    const auto theta0 = target.flatten();
    for (int i = 0; i < k; ++i) soft_update(target, online, tau);
    const auto got = target.flatten();
    const double keep = std::pow(1.0 - tau, k);
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double expect = (1.0 - keep) * theta[i] + keep * theta0[i];
        worst = std::max(worst, std::abs(got[i] - expect));
    }
    return worst;
}

double replay_max_z(std::size_t size, std::size_t draws, std::size_t batch, std::uint64_t seed) {
    ReplayBuffer buffer(size, seed);
    for (std::size_t i = 0; i < size; ++i) {
        Transition t;
        t.r = static_cast<double>(i);
        buffer.add(t);
    }
    std::vector<double> counts(size, 0.0);
    std::size_t taken = 0;
    while (taken < draws) {
        const std::size_t n = std::min(batch, draws - taken);
        for (std::size_t idx : buffer.sample_indices(n)) counts[idx] += 1.0;
        taken += n;
    }
    // Per mini-batch each index appears at most once with probability n/size.
    const double batches = static_cast<double>(draws) / static_cast<double>(batch);
    const double p = static_cast<double>(batch) / static_cast<double>(size);
    const double mean = batches * p;
    const double sigma = std::sqrt(batches * p * (1.0 - p));
    double worst = 0.0;
    for (double c : counts) worst = std::max(worst, std::abs(c - mean) / sigma);
    return worst;
}

double exploration_noise_std(int draws, double variance, std::uint64_t seed) {
    DdpgConfig dc;
    dc.noise_variance = variance;
    dc.seed = seed;
    DdpgAgent agent(dc, ObservationScaler{});
    std::array<double, kObsDim> s{};
    s[kObsPitchError] = 0.1;
    const double base = agent.act(s);
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double d = agent.select_action(s, true) - base;
        sum += d;
        sum2 += d * d;
    }
    const double mean = sum / draws;
    return std::sqrt(sum2 / draws - mean * mean);
}

std::uint64_t seeded_training_hash(int steps, std::uint64_t seed) {
    WorkbenchConfig cfg = WorkbenchConfig::defaults();
    cfg.agent.warmup = 200;
    cfg.agent.seed = seed;
    ProtectionEnv env(build_vehicle(cfg), training_env_config(cfg, seed));
    const auto& trim = env.trim().state;
    const double qbar = isa_atmosphere(trim.altitude()).dynamic_pressure(trim.airspeed());
    DdpgAgent agent(cfg.agent, default_scaler(cfg.env.limits, qbar));
    Observation obs = env.reset();
    for (int i = 0; i < steps; ++i) {
        if (env.done()) obs = env.reset();
        const double a = agent.select_action(obs, true);
        const StepResult r = env.step(a);
        agent.observe(obs, a, r.reward, r.observation, r.info.terminated);
        obs = r.observation;
        agent.train_step();
    }
    return agent.parameter_hash();
}

}  // namespace rlfep::oracle
