#pragma once

#include "rlfep/indi.hpp"
#include "rlfep/profile.hpp"
#include "rlfep/reward.hpp"

#include <array>
#include <memory>
#include <optional>
#include <random>
#include <string>

namespace rlfep {

enum class ProtectionMode { none, classical, rl };

std::string to_string(ProtectionMode mode);
ProtectionMode parse_mode(const std::string& text);

/// Raw observation [n_z (g), alpha (rad), phi (rad), p (rad/s), q (rad/s),
/// e_q = q_cmd - q (rad/s), qbar (Pa)].
using Observation = std::array<double, 7>;

enum ObservationIndex : std::size_t { kObsNz, kObsAlpha, kObsPhi, kObsP, kObsQ, kObsPitchError, kObsQbar };

struct EnvConfig {
    double duration = 10.0;      // s
    double agent_period = 0.01;  // s
    int physics_substeps = 5;
    double trim_mach = 0.6;
    double trim_altitude = 500.0;  // m
    ProtectionMode mode = ProtectionMode::rl;
    CommandProfile profile = CommandProfile::constant(0.0, 0.0, 0.0, 10.0);
    /// Training: draw a constant pitch command per episode, p = r = 0.
    bool random_pitch_command = false;
    double random_q_min = -10.0;  // deg/s
    double random_q_max = 25.0;
    double action_min = -20.0;  // deg/s, restorative command for a = -1
    double action_max = 30.0;   // deg/s, for a = +1
    EnvelopeLimits limits;
    RewardWeights weights;
    RateControllerConfig controller;
    std::uint64_t seed = 0;

    int total_steps() const;
    int sustain_steps() const;
    void validate() const;
};

enum class Termination { none, time_limit, sustained_violation, excess_violation, integrity };

std::string to_string(Termination t);

struct StepInfo {
    double time = 0.0;
    Vec3 pilot_cmd = Vec3::Zero();  // deg/s
    double q_rest = 0.0;            // deg/s
    double q_total = 0.0;           // deg/s, pitch command sent to the rate loop
    FlightCondition condition;
    Vec3 deflections = Vec3::Zero();  // deg
    RewardBreakdown reward;
    std::array<int, 3> violation_steps{};
    std::array<bool, 3> violation{};
    std::array<double, 3> exceedance{};
    bool below_ground = false;
    bool terminated = false;  // penalty or integrity; bootstrapping stops here
    bool truncated = false;   // episode time is up
    Termination reason = Termination::none;
    std::string error;
};

struct StepResult {
    Observation observation{};
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

/// Closed-loop MDP: trimmed aircraft + INDI rate loop + pitch-command
/// junction. One instance is strictly sequential.
class ProtectionEnv {
public:
    ProtectionEnv(std::shared_ptr<const Vehicle> vehicle, EnvConfig config);

    /// Returns to trim. A seed re-seeds the command generator.
    Observation reset(std::optional<std::uint64_t> seed = std::nullopt);
    StepResult step(double action);

    /// a in [-1, 1] (clamped) to restorative pitch rate [deg/s].
    double apply_action(double a) const;

    const EnvConfig& config() const { return config_; }
    const Vehicle& vehicle() const { return *vehicle_; }
    const TrimResult& trim() const { return trim_; }
    const AircraftState& state() const { return state_; }
    const ActuatorBank& actuators() const { return actuators_; }
    const CommandProfile& profile() const { return profile_; }
    double time() const { return step_index_ * config_.agent_period; }
    int step_index() const { return step_index_; }
    bool done() const { return done_; }
    const Observation& observation() const { return observation_; }
    /// Protected values at the current state (deg, g, deg/s).
    ProtectedValues protected_values() const;

    /// Replace the pilot profile used from the next reset on.
    void set_profile(CommandProfile profile);

private:
    Observation observe(const FlightCondition& fc, double q_cmd_deg) const;
    double pitch_command(double q_pilot, double action, double* q_rest) const;

    std::shared_ptr<const Vehicle> vehicle_;
    EnvConfig config_;
    TrimResult trim_;
    std::mt19937_64 rng_;
    CommandProfile profile_;
    AircraftState state_;
    ActuatorBank actuators_;
    RateController controller_;
    ViolationTimers timers_;
    FlightCondition condition_;
    Observation observation_{};
    int step_index_ = 0;
    bool done_ = true;
};

}  // namespace rlfep
