#include "oracles.hpp"

#include "rlfep/config.hpp"
#include "rlfep/env.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace rlfep;

TEST(Reward, TabulatedExamples) {
    for (const auto& c : oracle::reward_examples()) {
        if (c.tolerance == 0.0) EXPECT_EQ(c.got, c.expected) << c.name;
        else EXPECT_NEAR(c.got, c.expected, c.tolerance) << c.name;
    }
}

TEST(Reward, EnvelopeCostsAreNonPositiveContinuousAndMonotone) {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int i = 0; i < 20000; ++i) {
        double x1 = u(rng), x2 = u(rng);
        if (x1 > x2) std::swap(x1, x2);
        const double sign = (i % 2) ? 1.0 : -1.0;
        // in units of the limit
        ASSERT_LE(r_alpha(sign * 25.0 * x1, 25.0), 0.0);
        ASSERT_LE(r_nz(sign * 9.0 * x1, 9.0), 0.0);
        ASSERT_LE(r_q(sign * 30.0 * x1, 30.0), 0.0);
        ASSERT_GE(r_alpha(25.0 * x1, 25.0), r_alpha(25.0 * x2, 25.0));
        ASSERT_GE(r_nz(9.0 * x1, 9.0), r_nz(9.0 * x2, 9.0));
        ASSERT_GE(r_q(30.0 * x1, 30.0), r_q(30.0 * x2, 30.0));
    }
    // continuity at the activation thresholds
    const double h = 1e-9;
    EXPECT_NEAR(r_alpha(22.5 + h, 25.0), 0.0, 1e-15);
    EXPECT_NEAR(r_nz(9.0 + h, 9.0), 0.0, 1e-15);
    EXPECT_NEAR(r_q(30.0 + h, 30.0), 0.0, 1e-15);
}

TEST(Reward, TrackingCostIgnoresJointSignFlip) {
    std::mt19937_64 rng(72);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    for (int i = 0; i < 10000; ++i) {
        const double q = u(rng), c = u(rng);
        ASSERT_EQ(r_tracking(q, c), r_tracking(-q, -c));
    }
}

TEST(Reward, TrackingCapOnlyLimitsLargeCosts) {
    RewardWeights w;
    w.tracking_cap = 1.0;
    const EnvelopeLimits lim;
    const auto small = reward_total({2.0, 1.0, 9.0}, 10.0, lim, w, {});
    EXPECT_NEAR(small.tracking, r_tracking(9.0, 10.0, rad2deg(w.epsilon)), 1e-15);
    const auto big = reward_total({2.0, 1.0, 9.0}, 0.1, lim, w, {});
    EXPECT_EQ(big.tracking, 1.0);
    w.tracking_cap = 0.0;
    EXPECT_THROW(w.validate(), ConfigError);
}

TEST(Reward, ViolationTimersResetOnReentry) {
    ViolationTimers t;
    const auto lim = limit_pairs(EnvelopeLimits{});
    for (int i = 0; i < 5; ++i) t.update({26.0, 1.0, 0.0}, lim);
    EXPECT_EQ(t.steps(Protected::alpha), 5);
    EXPECT_EQ(t.steps(Protected::nz), 0);
    t.update({24.0, 1.0, 0.0}, lim);
    EXPECT_EQ(t.steps(Protected::alpha), 0);
    EXPECT_EQ(t.longest(Protected::alpha), 5);
    t.update({-11.0, -3.5, -12.0}, lim);
    EXPECT_EQ(t.current(), (std::array<int, 3>{1, 1, 1}));
}

// --- environment ------------------------------------------------------------------

namespace {

EnvConfig env_config(ProtectionMode mode, double q_cmd) {
    EnvConfig ec = WorkbenchConfig::defaults().env;
    ec.mode = mode;
    ec.random_pitch_command = false;
    ec.profile = CommandProfile::constant(0.0, q_cmd, 0.0, ec.duration);
    return ec;
}

std::shared_ptr<const Vehicle> vehicle() {
    static const auto v = build_vehicle(WorkbenchConfig::defaults());
    return v;
}

// Action that makes the restorative command zero.
double neutral_action(const EnvConfig& ec) { return -(ec.action_max + ec.action_min) / (ec.action_max - ec.action_min); }

}  // namespace

TEST(Env, ActionMapping) {
    ProtectionEnv env(vehicle(), env_config(ProtectionMode::rl, 0.0));
    EXPECT_EQ(env.apply_action(-1.0), -20.0);
    EXPECT_EQ(env.apply_action(1.0), 30.0);
    EXPECT_EQ(env.apply_action(0.0), 5.0);
    EXPECT_EQ(env.apply_action(3.0), 30.0);
    EXPECT_NEAR(env.apply_action(neutral_action(env.config())), 0.0, 1e-12);
}

TEST(Env, InterventionCostIsTheSquaredNormalizedRestorativeCommand) {
    EnvConfig plain_cfg = env_config(ProtectionMode::rl, 4.0);
    EnvConfig costed_cfg = plain_cfg;
    costed_cfg.weights.intervention = 2.0;
    ProtectionEnv plain(vehicle(), plain_cfg), costed(vehicle(), costed_cfg);
    plain.reset();
    costed.reset();
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double a = u(rng);
        const StepResult rp = plain.step(a), rc = costed.step(a);
        const double rest = plain.apply_action(a) / plain_cfg.limits.q_max;
        EXPECT_EQ(rp.info.reward.intervention, 0.0);
        EXPECT_DOUBLE_EQ(rc.info.reward.intervention, -rest * rest);
        EXPECT_NEAR(rc.reward - rp.reward, -2.0 * rest * rest, 1e-12);
        EXPECT_EQ(rc.observation, rp.observation);
    }
    costed.reset();
    EXPECT_NEAR(costed.step(neutral_action(costed_cfg)).info.reward.intervention, 0.0, 1e-20);
}

TEST(Env, ResetObservationAtTrim) {
    ProtectionEnv env(vehicle(), env_config(ProtectionMode::rl, 7.0));
    const Observation o = env.reset();
    EXPECT_NEAR(o[kObsNz], 1.0, 0.02);
    EXPECT_EQ(o[kObsQ], 0.0);
    EXPECT_DOUBLE_EQ(o[kObsPitchError], deg2rad(7.0));
    EXPECT_NEAR(o[kObsAlpha], deg2rad(env.trim().alpha_deg), 1e-12);
    EXPECT_GT(o[kObsQbar], 0.0);
}

TEST(Env, RandomCommandResetIsSeeded) {
    EnvConfig ec = env_config(ProtectionMode::rl, 0.0);
    ec.random_pitch_command = true;
    ProtectionEnv a(vehicle(), ec), b(vehicle(), ec);
    for (int i = 0; i < 20; ++i) {
        const Observation oa = a.reset(100 + i), ob = b.reset(100 + i);
        EXPECT_EQ(oa, ob);
        const double q = a.profile().at(0.0).y();
        EXPECT_GE(q, -10.0);
        EXPECT_LE(q, 25.0);
    }
}

TEST(Env, ZeroRestorativeCommandRegulatesTrim) {
    const EnvConfig ec = env_config(ProtectionMode::rl, 0.0);
    ProtectionEnv env(vehicle(), ec);
    env.reset();
    const double alpha0 = env.trim().alpha_deg;
    double worst = 0.0;
    while (!env.done()) {
        env.step(neutral_action(ec));
        worst = std::max(worst, std::abs(env.protected_values().alpha_deg - alpha0));
    }
    EXPECT_LT(worst, 0.1);
    EXPECT_EQ(env.step_index(), 1000);
}

TEST(Env, UnprotectedPullUpExceedsAngleLimit) {
    for (ProtectionMode mode : {ProtectionMode::none, ProtectionMode::rl}) {
        const EnvConfig ec = env_config(mode, 25.0);
        ProtectionEnv env(vehicle(), ec);
        env.reset();
        double peak = 0.0;
        while (!env.done()) {
            env.step(neutral_action(ec));
            peak = std::max(peak, env.protected_values().alpha_deg);
        }
        EXPECT_GT(peak, ec.limits.alpha_max) << to_string(mode);
    }
}

TEST(Env, SameActionsGiveIdenticalTrajectory) {
    const EnvConfig ec = env_config(ProtectionMode::rl, 12.0);
    auto run = [&] {
        ProtectionEnv env(vehicle(), ec);
        env.reset();
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::string trace;
        while (!env.done()) {
            const StepResult r = env.step(u(rng));
            trace.append(reinterpret_cast<const char*>(r.observation.data()), sizeof(double) * r.observation.size());
            trace.append(reinterpret_cast<const char*>(&r.reward), sizeof(double));
        }
        return fnv1a(trace);
    };
    EXPECT_EQ(run(), run());
}

TEST(Env, TimeAndTerminationFlagsAreConsistent) {
    std::mt19937_64 rng(81);
    std::uniform_real_distribution<double> u(-1.0, 1.0), q(-10.0, 25.0);
    for (int episode = 0; episode < 6; ++episode) {
        const EnvConfig ec = env_config(ProtectionMode::rl, q(rng));
        ProtectionEnv env(vehicle(), ec);
        env.reset();
        double last_t = 0.0;
        StepResult r;
        while (!env.done()) {
            r = env.step(episode % 2 ? u(rng) : 1.0);
            EXPECT_NEAR(r.info.time - last_t, ec.agent_period, 1e-12);
            last_t = r.info.time;
            EXPECT_FALSE(r.info.terminated && r.info.truncated);
            EXPECT_EQ(r.done, r.info.terminated || r.info.truncated);
            EXPECT_EQ(r.info.terminated, r.info.reward.done);
            EXPECT_GE(r.info.q_total, ec.limits.q_min);
            EXPECT_LE(r.info.q_total, ec.limits.q_max);
        }
        if (r.info.truncated) EXPECT_NEAR(r.info.time, ec.duration, 1e-9);
        else EXPECT_LT(r.info.time, ec.duration + ec.agent_period);
        EXPECT_THROW(env.step(0.0), Error);
    }
}
