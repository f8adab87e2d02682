#include "rlfep/env.hpp"

#include <algorithm>

namespace rlfep {

std::string to_string(ProtectionMode mode) {
    switch (mode) {
        case ProtectionMode::none: return "none";
        case ProtectionMode::classical: return "classical";
        case ProtectionMode::rl: return "rl";
    }
    return "unknown";
}

ProtectionMode parse_mode(const std::string& text) {
    if (text == "none") return ProtectionMode::none;
    if (text == "classical") return ProtectionMode::classical;
    if (text == "rl") return ProtectionMode::rl;
    throw ConfigError("unknown protection mode '" + text + "' (expected none, classical or rl)");
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::none: return "none";
        case Termination::time_limit: return "time_limit";
        case Termination::sustained_violation: return "sustained_violation";
        case Termination::excess_violation: return "excess_violation";
        case Termination::integrity: return "integrity";
    }
    return "unknown";
}

int EnvConfig::total_steps() const { return static_cast<int>(std::lround(duration / agent_period)); }

int EnvConfig::sustain_steps() const { return static_cast<int>(std::lround(weights.sustain_time / agent_period)); }

void EnvConfig::validate() const {
    if (!(duration > 0.0)) throw ConfigError("episode duration must be positive");
    if (!(agent_period > 0.0)) throw ConfigError("agent period must be positive");
    if (physics_substeps < 1) throw ConfigError("physics_substeps must be at least 1");
    if (!(action_max > action_min)) throw ConfigError("action range is empty");
    if (random_pitch_command && !(random_q_max >= random_q_min)) throw ConfigError("random command range is empty");
    limits.validate();
    weights.validate();
    controller.gains.validate();
    if (!random_pitch_command) profile.validate(duration);
}

ProtectionEnv::ProtectionEnv(std::shared_ptr<const Vehicle> vehicle, EnvConfig config)
    : vehicle_(std::move(vehicle)),
      config_(std::move(config)),
      rng_(config_.seed),
      profile_(config_.profile),
      controller_(config_.controller) {
    if (!vehicle_) throw ConfigError("environment needs a vehicle");
    config_.validate();
    trim_ = trim_level_flight(*vehicle_, config_.trim_mach, config_.trim_altitude);
    actuators_.limits = vehicle_->actuator_limits();
}

void ProtectionEnv::set_profile(CommandProfile profile) {
    profile.validate(config_.duration);
    config_.profile = profile;
    profile_ = std::move(profile);
}

double ProtectionEnv::apply_action(double a) const {
    const double x = std::clamp(a, -1.0, 1.0);
    const double mid = 0.5 * (config_.action_max + config_.action_min);
    const double half = 0.5 * (config_.action_max - config_.action_min);
    return mid + half * x;
}

ProtectedValues ProtectionEnv::protected_values() const {
    return {rad2deg(condition_.alpha), condition_.load_factor, rad2deg(state_.omega.y())};
}

Observation ProtectionEnv::reset(std::optional<std::uint64_t> seed) {
    if (seed) rng_.seed(*seed);
    if (config_.random_pitch_command) {
        std::uniform_real_distribution<double> dist(config_.random_q_min, config_.random_q_max);
        profile_ = CommandProfile::constant(0.0, dist(rng_), 0.0, config_.duration);
    } else {
        profile_ = config_.profile;
    }
    state_ = trim_.state;
    actuators_.set_positions(trim_.deflections_deg);
    controller_.reset();
    timers_.reset();
    step_index_ = 0;
    done_ = false;
    condition_ = vehicle_->condition(state_, actuators_.positions(), trim_.thrust_n);
    observation_ = observe(condition_, profile_.at(0.0).y());
    return observation_;
}

Observation ProtectionEnv::observe(const FlightCondition& fc, double q_cmd_deg) const {
    const double phi = std::remainder(state_.euler.x(), 2.0 * std::numbers::pi);
    return {fc.load_factor, fc.alpha, phi, state_.omega.x(), state_.omega.y(), deg2rad(q_cmd_deg) - state_.omega.y(),
            fc.dynamic_pressure};
}

double ProtectionEnv::pitch_command(double q_pilot, double action, double* q_rest) const {
    *q_rest = 0.0;
    switch (config_.mode) {
        case ProtectionMode::none:
            return q_pilot;
        case ProtectionMode::classical: {
            const auto b = classical_bounds(*vehicle_, state_, actuators_.positions(), config_.limits);
            return protect_pitch_command(q_pilot, rad2deg(condition_.alpha), b.bounds, config_.limits);
        }
        case ProtectionMode::rl:
            *q_rest = apply_action(action);
            return std::clamp(q_pilot + *q_rest, config_.limits.q_min, config_.limits.q_max);
    }
    return q_pilot;
}

StepResult ProtectionEnv::step(double action) {
    if (done_) throw Error("step() on a finished episode; call reset() first");
    StepResult out;
    StepInfo& info = out.info;
    const double thrust = trim_.thrust_n;
    const Vec3 pilot = profile_.at(time());
    info.pilot_cmd = pilot;
    info.q_total = pitch_command(pilot.y(), action, &info.q_rest);
    const Vec3 rate_cmd(deg2rad(pilot.x()), deg2rad(info.q_total), deg2rad(pilot.z()));

    try {
        const Vec3 deflection_cmd =
            controller_.update(*vehicle_, state_, actuators_.positions(), thrust, rate_cmd, config_.agent_period);
        const double dt = config_.agent_period / config_.physics_substeps;
        for (int i = 0; i < config_.physics_substeps; ++i) {
            state_ = vehicle_->advance(state_, actuators_.positions(), thrust, dt);
            actuators_.step(deflection_cmd, dt);
        }
        ++step_index_;
        condition_ = vehicle_->condition(state_, actuators_.positions(), thrust);
    } catch (const Error& e) {
        // IntegrityError, SingularityError or ControllerError: the episode ends
        // here with the integrity penalty and the last valid observation.
        ++step_index_;
        done_ = true;
        info.time = time();
        info.terminated = true;
        info.reason = Termination::integrity;
        info.error = e.what();
        info.condition = condition_;
        info.deflections = actuators_.positions();
        info.reward.penalty = config_.weights.integrity_penalty;
        info.reward.total = config_.weights.integrity_penalty;
        info.reward.done = true;
        out.observation = observation_;
        out.reward = info.reward.total;
        out.done = true;
        return out;
    }

    info.time = time();
    info.condition = condition_;
    info.deflections = actuators_.positions();
    info.below_ground = state_.altitude() < 0.0;

    const ProtectedValues values = protected_values();
    const auto pairs = limit_pairs(config_.limits);
    timers_.update(values, pairs);
    info.violation_steps = timers_.current();
    for (std::size_t i = 0; i < 3; ++i) {
        const double x = values[static_cast<Protected>(i)];
        info.violation[i] = pairs[i].beyond(x);
        info.exceedance[i] = pairs[i].exceedance(x);
    }
    const double q_cmd_now = profile_.at(time()).y();
    const Penalty penalty =
        penalty_and_done(info.violation_steps, info.exceedance, config_.sustain_steps(), config_.weights);
    info.reward = reward_total(values, q_cmd_now, config_.limits, config_.weights, penalty);
    if (config_.weights.intervention > 0.0) {
        const double u = info.q_rest / config_.limits.q_max;
        info.reward.intervention = -u * u;
        info.reward.total += config_.weights.intervention * info.reward.intervention;
    }

    if (penalty.done) {
        info.terminated = true;
        info.reason = penalty.excess ? Termination::excess_violation : Termination::sustained_violation;
    } else if (step_index_ >= config_.total_steps()) {
        info.truncated = true;
        info.reason = Termination::time_limit;
    }
    done_ = info.terminated || info.truncated;

    observation_ = observe(condition_, q_cmd_now);
    out.observation = observation_;
    out.reward = info.reward.total;
    out.done = done_;
    return out;
}

}  // namespace rlfep
