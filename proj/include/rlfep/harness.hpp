#pragma once

#include "rlfep/config.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rlfep {

/// One agent step of a closed-loop episode.
struct LogRow {
    double t = 0.0;
    double alpha_deg = 0.0;
    double nz = 0.0;
    double p = 0.0, q = 0.0, r = 0.0;  // deg/s
    double phi = 0.0, theta = 0.0;     // deg
    double altitude = 0.0;             // m
    double airspeed = 0.0;             // m/s
    Vec3 deflections = Vec3::Zero();   // deg
    double p_cmd = 0.0;                // deg/s, pilot
    double q_cmd = 0.0;
    double q_rest = 0.0;
    double q_total = 0.0;
    double action = 0.0;  // normalized agent output (0 when no agent)
    RewardBreakdown reward;
    std::array<bool, 3> violation{};
};

struct EpisodeSummary {
    std::string scenario;
    ProtectionMode mode = ProtectionMode::none;
    int steps = 0;
    double duration = 0.0;
    Termination reason = Termination::none;
    std::string error;
    double total_reward = 0.0;
    double alpha_max = 0.0, alpha_min = 0.0;
    double nz_max = 0.0, nz_min = 0.0;
    double q_max = 0.0, q_min = 0.0;
    std::array<double, 3> longest_violation{};  // s, per protected variable
    std::array<int, 3> violation_samples{};
    std::array<double, 3> max_exceedance{};     // relative, negative when never reached
    double tracking_rms = 0.0;                  // deg/s, q against the pilot command
    bool below_ground = false;
    /// Failure metric: a variable beyond its limit continuously for the
    /// sustain time, or a penalty/integrity termination.
    bool failed = false;
};

struct EpisodeLog {
    std::vector<LogRow> rows;
    EpisodeSummary summary;
};

/// Runs one full episode. `policy` is required in rl mode and ignored otherwise.
EpisodeLog run_episode(ProtectionEnv& env, const Policy* policy, const std::string& name = {});

/// Builds the environment for a scenario and runs it.
EpisodeLog run_scenario(const WorkbenchConfig& config, const Scenario& scenario, ProtectionMode mode,
                        const Policy* policy, std::uint64_t seed = 0);

void write_episode_csv(const EpisodeLog& log, const std::filesystem::path& path);
void write_summary(const EpisodeSummary& s, std::ostream& os);
std::vector<std::string> episode_csv_header();

// --- Training ----------------------------------------------------------------

struct EpisodeMetrics {
    int episode = 0;
    int steps = 0;
    double q_cmd = 0.0;
    double reward = 0.0;
    double average_reward = 0.0;  // over the last `window` episodes
    double mean_q = 0.0;
    double critic_loss = 0.0;
    double actor_objective = 0.0;
    double noise_variance = 0.0;
    std::uint64_t updates = 0;
    Termination reason = Termination::none;
};

struct TrainResult {
    int episodes = 0;
    bool reached_stop_value = false;
    double final_average = 0.0;
    std::filesystem::path checkpoint;
    std::filesystem::path metrics;
    std::filesystem::path validation;  // empty when validation is off
    std::uint64_t parameter_hash = 0;  // of the policy saved as agent.bin
    int best_episode = -1;             // episode whose policy became agent.bin; -1 = the final one
    std::vector<int> best_passed;      // validation passes per roll command for that policy
    bool clean_validation = false;     // stopped because every validation run passed
};

struct TrainOptions {
    std::optional<int> max_episodes;        // overrides the config cap
    std::optional<std::uint64_t> seed;      // overrides training.seed
    std::optional<std::filesystem::path> resume;
    /// Called after every episode; return false to stop early.
    std::function<bool(const EpisodeMetrics&)> on_episode;
};

/// Environment configuration used for training (random pitch commands,
/// capped tracking cost, rl mode).
EnvConfig training_env_config(const WorkbenchConfig& config, std::uint64_t seed);

/// Validation grid: the sweep range shifted by half an increment, so the
/// commands never coincide with the evaluation sweep.
std::vector<SweepSpec> validation_specs(const WorkbenchConfig& config);

/// Writes `metrics.csv`, periodic `checkpoint.bin`, `final.bin` and
/// `agent.bin` into `out_dir`. With validation on, agent.bin is the policy
/// that scored best on the validation grid (passes for the first roll
/// command first, then the next) and `validation.csv` lists every score;
/// otherwise agent.bin is the final agent. A non-finite loss aborts with
/// TrainingError after the last good checkpoint has been kept on disk.
TrainResult train(const WorkbenchConfig& config, const std::filesystem::path& out_dir, const TrainOptions& options = {});

// --- Sweeps --------------------------------------------------------------------

struct SweepRow {
    int index = 0;
    double q_cmd = 0.0;
    double p_cmd = 0.0;
    std::uint64_t seed = 0;
    EpisodeSummary summary;
};

struct SweepAggregate {
    int runs = 0;
    int passed = 0;
    double pass_rate = 0.0;
    std::vector<int> failed_indices;
};

/// One episode per pitch command of the spec. Runs are independent and can be
/// spread over `jobs` threads; the result order does not depend on `jobs`.
/// When `log_dir` is set each run's episode CSV is written there.
std::vector<SweepRow> sweep(const WorkbenchConfig& config, const SweepSpec& spec, ProtectionMode mode,
                            const Policy* policy, int jobs = 1,
                            const std::optional<std::filesystem::path>& log_dir = std::nullopt);

SweepAggregate aggregate(const std::vector<SweepRow>& rows);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);
std::string sweep_run_name(double q_cmd);

// --- Plots ---------------------------------------------------------------------

/// Time-series SVGs (alpha, nz, q, surfaces) with red limit lines from an
/// episode CSV. Returns the written paths.
std::vector<std::filesystem::path> plot_episode(const std::filesystem::path& episode_csv,
                                                const std::filesystem::path& out_dir, const EnvelopeLimits& limits);

/// Sweep overview: peak values per pitch command with limit lines, and
/// overlays of the per-run traces when a log directory is given.
std::vector<std::filesystem::path> plot_sweep(const std::filesystem::path& sweep_csv,
                                              const std::filesystem::path& out_dir, const EnvelopeLimits& limits,
                                              const std::optional<std::filesystem::path>& log_dir = std::nullopt);

}  // namespace rlfep
