#pragma once

#include "rlfep/ddpg.hpp"
#include "rlfep/env.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace rlfep {

struct Scenario {
    std::string name;
    CommandProfile profile;
    /// Mode stored with the scenario; the CLI may override it.
    std::optional<ProtectionMode> mode;
};

struct SweepSpec {
    double q_min = -10.0;      // deg/s
    double q_max = 25.0;       // deg/s
    double increment = 0.5;    // deg/s
    double p_cmd = 0.0;        // deg/s, constant roll command (60 for the coupled sweep)
    std::uint64_t seed = 0;    // per-run seeds derive from this

    void validate() const;
    /// q_min, q_min + increment, ... up to q_max (inclusive within 1e-9).
    std::vector<double> commands() const;
};

struct TrainingSettings {
    std::uint64_t seed = 1;
    int max_episodes = 3000;
    int min_episodes = 150;
    double stop_avg_reward = 0.0;  // moving average that ends training
    int window = 150;
    int checkpoint_every = 100;    // episodes; 0 = only at the end
    double tracking_cap = 1.0;     // applied to the training reward only
    double intervention_weight = 0.0;  // training reward only, see RewardWeights::intervention
    double q_cmd_min = -10.0;
    double q_cmd_max = 25.0;
    int updates_per_step = 1;
    /// Every this many episodes the current policy flies the validation grid
    /// (sweep commands shifted by half an increment, once per roll command)
    /// and the best one so far becomes agent.bin. 0 turns validation off.
    int validate_every = 125;
    std::vector<double> validation_p_cmd{0.0, 60.0};
    bool stop_on_clean_validation = true;

    void validate() const;
};

struct AeroSettings {
    std::string model = "surrogate";  // "surrogate" or "table"
    std::string table_dir;            // used with "table"; relative to the config file
};

/// Everything a run needs. Loaded from one JSON document; every key is
/// optional and falls back to the defaults below.
struct WorkbenchConfig {
    AeroSettings aero;
    double mass = 9295.44;
    Mat3 inertia = MassProperties::f16_nominal().inertia;
    double max_thrust = 80000.0;
    std::array<ActuatorLimits, 3> actuators = default_actuator_limits();
    IntegratorOptions integrator;
    EnvConfig env;
    DdpgConfig agent;
    TrainingSettings training;
    SweepSpec sweep;
    std::map<std::string, Scenario> scenarios;

    void validate() const;

    std::string to_json_text() const;
    /// FNV-1a over the canonical JSON text.
    std::uint64_t hash() const;

    static WorkbenchConfig defaults();
    static WorkbenchConfig from_json_text(const std::string& text, const std::filesystem::path& base_dir = {});
    static WorkbenchConfig load(const std::filesystem::path& path);
};

/// The three built-in scenarios: "1" (q = 25 deg/s), "2" (q = -10 deg/s) and
/// "3" (p = 60 deg/s with q stepping from +20 down to -10 deg/s).
std::map<std::string, Scenario> default_scenarios(double duration = 10.0);

std::shared_ptr<const Vehicle> build_vehicle(const WorkbenchConfig& config);

/// Limit-based affine ranges that map each observation element to about [-1, 1].
ObservationScaler default_scaler(const EnvelopeLimits& limits, double trim_dynamic_pressure);

std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

}  // namespace rlfep
