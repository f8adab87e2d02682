#include "rlfep/harness.hpp"

#include "rlfep/csv.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

namespace rlfep {

namespace {

void require_policy(ProtectionMode mode, const Policy* policy) {
    if (mode == ProtectionMode::rl && policy == nullptr) {
        throw ConfigError("rl mode needs a trained checkpoint (--checkpoint)");
    }
}

}  // namespace

// --- Episodes ------------------------------------------------------------------

EpisodeLog run_episode(ProtectionEnv& env, const Policy* policy, const std::string& name) {
    const ProtectionMode mode = env.config().mode;
    require_policy(mode, policy);
    EpisodeLog log;
    EpisodeSummary& s = log.summary;
    s.scenario = name;
    s.mode = mode;
    s.alpha_max = s.nz_max = s.q_max = -std::numeric_limits<double>::infinity();
    s.alpha_min = s.nz_min = s.q_min = std::numeric_limits<double>::infinity();
    s.max_exceedance.fill(-std::numeric_limits<double>::infinity());

    Observation obs = env.reset();
    const double period = env.config().agent_period;
    std::array<int, 3> longest{};
    double sq_err = 0.0;
    while (!env.done()) {
        const double action = mode == ProtectionMode::rl ? (*policy)(obs) : 0.0;
        const StepResult res = env.step(action);
        const StepInfo& info = res.info;
        obs = res.observation;
        s.total_reward += res.reward;
        s.steps = env.step_index();
        if (info.reason == Termination::integrity) {
            s.reason = info.reason;
            s.error = info.error;
            break;
        }
        const auto& st = env.state();
        const ProtectedValues v = env.protected_values();
        LogRow row;
        row.t = info.time;
        row.alpha_deg = v.alpha_deg;
        row.nz = v.nz;
        row.p = rad2deg(st.omega.x());
        row.q = v.q_deg_s;
        row.r = rad2deg(st.omega.z());
        row.phi = rad2deg(std::remainder(st.euler.x(), 2.0 * std::numbers::pi));
        row.theta = rad2deg(st.euler.y());
        row.altitude = st.altitude();
        row.airspeed = info.condition.airspeed;
        row.deflections = info.deflections;
        row.p_cmd = info.pilot_cmd.x();
        row.q_cmd = env.profile().at(info.time).y();
        row.q_rest = info.q_rest;
        row.q_total = info.q_total;
        row.action = action;
        row.reward = info.reward;
        row.violation = info.violation;
        log.rows.push_back(row);

        s.alpha_max = std::max(s.alpha_max, v.alpha_deg);
        s.alpha_min = std::min(s.alpha_min, v.alpha_deg);
        s.nz_max = std::max(s.nz_max, v.nz);
        s.nz_min = std::min(s.nz_min, v.nz);
        s.q_max = std::max(s.q_max, v.q_deg_s);
        s.q_min = std::min(s.q_min, v.q_deg_s);
        for (std::size_t i = 0; i < 3; ++i) {
            longest[i] = std::max(longest[i], info.violation_steps[i]);
            if (info.violation[i]) ++s.violation_samples[i];
            s.max_exceedance[i] = std::max(s.max_exceedance[i], info.exceedance[i]);
        }
        sq_err += (v.q_deg_s - row.q_cmd) * (v.q_deg_s - row.q_cmd);
        s.below_ground = s.below_ground || info.below_ground;
        if (res.done) s.reason = info.reason;
    }
    s.duration = s.steps * period;
    for (std::size_t i = 0; i < 3; ++i) s.longest_violation[i] = longest[i] * period;
    s.tracking_rms = log.rows.empty() ? 0.0 : std::sqrt(sq_err / static_cast<double>(log.rows.size()));
    const int sustain = env.config().sustain_steps();
    const bool sustained = std::any_of(longest.begin(), longest.end(), [&](int n) { return n >= sustain; });
    s.failed = sustained || s.reason == Termination::sustained_violation ||
               s.reason == Termination::excess_violation || s.reason == Termination::integrity;
    return log;
}

EpisodeLog run_scenario(const WorkbenchConfig& config, const Scenario& scenario, ProtectionMode mode,
                        const Policy* policy, std::uint64_t seed) {
    require_policy(mode, policy);
    EnvConfig ec = config.env;
    ec.mode = mode;
    ec.random_pitch_command = false;
    ec.profile = scenario.profile;
    ec.seed = seed;
    ProtectionEnv env(build_vehicle(config), ec);
    return run_episode(env, policy, scenario.name);
}

std::vector<std::string> episode_csv_header() {
    return {"t",        "alpha_deg", "nz",        "p_deg_s",   "q_deg_s",     "r_deg_s",    "phi_deg",
            "theta_deg", "altitude_m", "airspeed_m_s", "aileron_deg", "tail_deg", "rudder_deg", "p_cmd_deg_s",
            "q_cmd_deg_s", "q_rest_deg_s", "q_total_deg_s", "action", "r_s", "r_t", "r_a",
            "r_n",      "r_q",       "r_p",       "r_i",       "reward",    "viol_alpha",  "viol_nz",    "viol_q"};
}

void write_episode_csv(const EpisodeLog& log, const std::filesystem::path& path) {
    CsvWriter w(path, episode_csv_header());
    for (const auto& r : log.rows) {
        w << r.t << r.alpha_deg << r.nz << r.p << r.q << r.r << r.phi << r.theta << r.altitude << r.airspeed
          << r.deflections.x() << r.deflections.y() << r.deflections.z() << r.p_cmd << r.q_cmd << r.q_rest
          << r.q_total << r.action << r.reward.survival << r.reward.tracking << r.reward.alpha << r.reward.nz
          << r.reward.q << r.reward.penalty << r.reward.intervention << r.reward.total << r.violation[0] << r.violation[1] << r.violation[2];
        w.end_row();
    }
}

void write_summary(const EpisodeSummary& s, std::ostream& os) {
    auto f = [](double v) { return format_double(v); };
    os << "scenario " << (s.scenario.empty() ? "-" : s.scenario) << ", mode " << to_string(s.mode) << "\n"
       << "  steps " << s.steps << " (" << f(s.duration) << " s), end: " << to_string(s.reason) << "\n"
       << "  alpha [" << f(s.alpha_min) << ", " << f(s.alpha_max) << "] deg\n"
       << "  n_z [" << f(s.nz_min) << ", " << f(s.nz_max) << "] g\n"
       << "  q [" << f(s.q_min) << ", " << f(s.q_max) << "] deg/s, max |q| "
       << f(std::max(std::abs(s.q_min), std::abs(s.q_max))) << "\n"
       << "  longest violation alpha " << f(s.longest_violation[0]) << " s, n_z " << f(s.longest_violation[1])
       << " s, q " << f(s.longest_violation[2]) << " s\n"
       << "  tracking rms " << f(s.tracking_rms) << " deg/s, reward " << f(s.total_reward) << "\n"
       << "  result: " << (s.failed ? "FAIL" : "pass") << "\n";
    if (!s.error.empty()) os << "  error: " << s.error << "\n";
    if (s.below_ground) os << "  note: altitude went below zero\n";
}

// --- Training ------------------------------------------------------------------

EnvConfig training_env_config(const WorkbenchConfig& config, std::uint64_t seed) {
    EnvConfig ec = config.env;
    ec.mode = ProtectionMode::rl;
    ec.random_pitch_command = true;
    ec.random_q_min = config.training.q_cmd_min;
    ec.random_q_max = config.training.q_cmd_max;
    ec.weights.tracking_cap = std::min(ec.weights.tracking_cap, config.training.tracking_cap);
    ec.weights.intervention = std::max(ec.weights.intervention, config.training.intervention_weight);
    ec.seed = seed;
    return ec;
}

std::vector<SweepSpec> validation_specs(const WorkbenchConfig& config) {
    std::vector<SweepSpec> out;
    for (double p : config.training.validation_p_cmd) {
        SweepSpec v = config.sweep;
        v.q_min += 0.5 * v.increment;
        v.q_max = std::max(v.q_min, v.q_max - 0.5 * v.increment);
        v.p_cmd = p;
        out.push_back(v);
    }
    return out;
}

TrainResult train(const WorkbenchConfig& config, const std::filesystem::path& out_dir, const TrainOptions& options) {
    config.validate();
    const std::uint64_t seed = options.seed.value_or(config.training.seed);
    const int max_episodes = options.max_episodes.value_or(config.training.max_episodes);
    if (max_episodes < 1) throw ConfigError("max episodes must be at least 1");
    std::filesystem::create_directories(out_dir);

    ProtectionEnv env(build_vehicle(config), training_env_config(config, seed));
    DdpgConfig dc = config.agent;
    dc.seed = seed;
    const double trim_qbar = env.trim().state.airspeed() * env.trim().state.airspeed() * 0.5 *
                             isa_atmosphere(env.trim().state.altitude()).density;
    DdpgAgent agent = options.resume ? DdpgAgent::load(*options.resume)
                                     : DdpgAgent(dc, default_scaler(config.env.limits, trim_qbar));

    TrainResult result;
    result.metrics = out_dir / "metrics.csv";
    result.checkpoint = out_dir / "agent.bin";
    const auto periodic = out_dir / "checkpoint.bin";
    CsvWriter metrics(result.metrics, {"episode", "steps", "q_cmd_deg_s", "reward", "average_reward", "mean_q",
                                       "critic_loss", "actor_objective", "noise_variance", "updates", "termination"});
    std::deque<double> window;
    double window_sum = 0.0;
    const int window_size = config.training.window;

    const int validate_every = config.training.validate_every;
    const auto vspecs = validation_specs(config);
    std::optional<CsvWriter> vlog;
    if (validate_every > 0) {
        result.validation = out_dir / "validation.csv";
        std::vector<std::string> cols{"episode"};
        for (const auto& v : vspecs) cols.push_back("passed_p" + format_double(v.p_cmd));
        cols.push_back("runs");
        cols.push_back("best");
        vlog.emplace(result.validation, cols);
    }
    // Pass counts compare lexicographically: the first roll command decides, the rest break ties.
    auto validate_policy = [&](int ep) {
        const Policy policy = Policy::from_agent(agent);
        std::vector<int> passed;
        std::size_t runs = 0;
        for (const auto& v : vspecs) {
            const auto rows = sweep(config, v, ProtectionMode::rl, &policy);
            passed.push_back(aggregate(rows).passed);
            runs = rows.size();
        }
        const bool better = result.best_episode < 0 || passed > result.best_passed;
        if (better) {
            result.best_episode = ep;
            result.best_passed = passed;
            agent.save(result.checkpoint);
            result.parameter_hash = agent.parameter_hash();
        }
        *vlog << ep;
        for (int n : passed) *vlog << n;
        *vlog << runs << (better ? 1 : 0);
        vlog->end_row();
        return std::all_of(passed.begin(), passed.end(), [&](int n) { return n == static_cast<int>(runs); });
    };

    for (int ep = 0; ep < max_episodes; ++ep) {
        Observation obs = env.reset();
        EpisodeMetrics m;
        m.episode = ep;
        m.q_cmd = env.profile().at(0.0).y();
        int updates = 0;
        UpdateStats us;
        try {
            while (!env.done()) {
                const double a = agent.select_action(obs, true);
                const StepResult res = env.step(a);
                agent.observe(obs, a, res.reward, res.observation, res.info.terminated);
                obs = res.observation;
                m.reward += res.reward;
                if (res.done) m.reason = res.info.reason;
                for (int k = 0; k < config.training.updates_per_step; ++k) {
                    if (!agent.train_step(&us)) break;
                    ++updates;
                    m.mean_q += us.mean_q;
                    m.critic_loss += us.critic_loss;
                    m.actor_objective += us.actor_objective;
                }
            }
        } catch (const TrainingError& e) {
            throw TrainingError(std::string(e.what()) + " in episode " + std::to_string(ep) +
                                "; last good checkpoint: " +
                                (std::filesystem::exists(periodic) ? periodic.string() : std::string("none")));
        }
        m.steps = env.step_index();
        if (updates > 0) {
            m.mean_q /= updates;
            m.critic_loss /= updates;
            m.actor_objective /= updates;
        }
        m.noise_variance = agent.noise().variance();
        m.updates = agent.updates();
        window.push_back(m.reward);
        window_sum += m.reward;
        if (static_cast<int>(window.size()) > window_size) {
            window_sum -= window.front();
            window.pop_front();
        }
        m.average_reward = window_sum / static_cast<double>(window.size());
        metrics << m.episode << m.steps << m.q_cmd << m.reward << m.average_reward << m.mean_q << m.critic_loss
                << m.actor_objective << m.noise_variance << static_cast<std::size_t>(m.updates)
                << to_string(m.reason);
        metrics.end_row();
        result.episodes = ep + 1;
        result.final_average = m.average_reward;

        if (config.training.checkpoint_every > 0 && (ep + 1) % config.training.checkpoint_every == 0) {
            agent.save(periodic);
        }
        if (validate_every > 0 && (ep + 1) % validate_every == 0 && validate_policy(ep) &&
            config.training.stop_on_clean_validation) {
            result.clean_validation = true;
        }
        const bool full_window = static_cast<int>(window.size()) >= window_size;
        if (full_window && ep + 1 >= config.training.min_episodes &&
            m.average_reward >= config.training.stop_avg_reward) {
            result.reached_stop_value = true;
        }
        const bool keep_going = !options.on_episode || options.on_episode(m);
        if (result.reached_stop_value || result.clean_validation || !keep_going) break;
    }
    agent.save(out_dir / "final.bin");
    if (result.best_episode < 0) {
        agent.save(result.checkpoint);
        result.parameter_hash = agent.parameter_hash();
    }
    return result;
}

// --- Sweeps --------------------------------------------------------------------

std::string sweep_run_name(double q_cmd) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "q%+06.1f", q_cmd);
    return buf;
}

std::vector<SweepRow> sweep(const WorkbenchConfig& config, const SweepSpec& spec, ProtectionMode mode,
                            const Policy* policy, int jobs, const std::optional<std::filesystem::path>& log_dir) {
    require_policy(mode, policy);
    const std::vector<double> cmds = spec.commands();
    std::vector<SweepRow> rows(cmds.size());
    if (log_dir) std::filesystem::create_directories(*log_dir);
    // The vehicle (aero data, mass, actuators) is immutable and shared.
    const auto vehicle = build_vehicle(config);

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (std::size_t i = next++; i < cmds.size(); i = next++) {
            try {
                SweepRow& row = rows[i];
                row.index = static_cast<int>(i);
                row.q_cmd = cmds[i];
                row.p_cmd = spec.p_cmd;
                row.seed = spec.seed + i;
                EnvConfig ec = config.env;
                ec.mode = mode;
                ec.random_pitch_command = false;
                ec.profile = CommandProfile::constant(spec.p_cmd, cmds[i], 0.0, ec.duration);
                ec.seed = row.seed;
                ProtectionEnv env(vehicle, ec);
                EpisodeLog log = run_episode(env, policy, sweep_run_name(cmds[i]));
                row.summary = log.summary;
                if (log_dir) write_episode_csv(log, *log_dir / (sweep_run_name(cmds[i]) + ".csv"));
            } catch (const TrimError&) {
                // Setup failures abort the whole sweep; they are not per-run outcomes.
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            } catch (const ConfigError&) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            } catch (const Error& e) {
                SweepRow& row = rows[i];
                row.summary.reason = Termination::integrity;
                row.summary.error = e.what();
                row.summary.failed = true;
            }
        }
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cmds.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return rows;
}

SweepAggregate aggregate(const std::vector<SweepRow>& rows) {
    SweepAggregate a;
    a.runs = static_cast<int>(rows.size());
    for (const auto& r : rows) {
        if (r.summary.failed) {
            a.failed_indices.push_back(r.index);
        } else {
            ++a.passed;
        }
    }
    a.pass_rate = a.runs > 0 ? static_cast<double>(a.passed) / a.runs : 0.0;
    return a;
}

namespace {

const std::vector<std::string>& sweep_header() {
    static const std::vector<std::string> h = {
        "index",         "q_cmd_deg_s",     "p_cmd_deg_s",   "seed",          "mode",
        "passed",        "termination",     "steps",         "alpha_max_deg", "alpha_min_deg",
        "nz_max",        "nz_min",          "q_max_deg_s",   "q_min_deg_s",   "viol_alpha_s",
        "viol_nz_s",     "viol_q_s",        "exceed_alpha",  "exceed_nz",     "exceed_q",
        "tracking_rms",  "reward"};
    return h;
}

Termination parse_termination(const std::string& s, std::size_t line) {
    for (auto t : {Termination::none, Termination::time_limit, Termination::sustained_violation,
                   Termination::excess_violation, Termination::integrity}) {
        if (to_string(t) == s) return t;
    }
    throw ParseError("unknown termination '" + s + "'", line);
}

}  // namespace

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    CsvWriter w(path, sweep_header());
    for (const auto& r : rows) {
        const auto& s = r.summary;
        w << r.index << r.q_cmd << r.p_cmd << static_cast<std::size_t>(r.seed) << to_string(s.mode) << !s.failed
          << to_string(s.reason) << s.steps << s.alpha_max << s.alpha_min << s.nz_max << s.nz_min << s.q_max
          << s.q_min << s.longest_violation[0] << s.longest_violation[1] << s.longest_violation[2]
          << s.max_exceedance[0] << s.max_exceedance[1] << s.max_exceedance[2] << s.tracking_rms << s.total_reward;
        w.end_row();
    }
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0);
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError("empty sweep file " + path.string(), 1);
    const auto header = split_csv_line(line);
    if (header != sweep_header()) throw ParseError("not a sweep results file: unexpected header", 1);
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        if (c.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(c.size()),
                             line_no);
        }
        auto num = [&](std::size_t i) { return parse_double(c[i], line_no); };
        SweepRow r;
        r.index = static_cast<int>(num(0));
        r.q_cmd = num(1);
        r.p_cmd = num(2);
        r.seed = static_cast<std::uint64_t>(num(3));
        auto& s = r.summary;
        try {
            s.mode = parse_mode(c[4]);
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), line_no);
        }
        s.failed = num(5) == 0.0;
        s.reason = parse_termination(c[6], line_no);
        s.steps = static_cast<int>(num(7));
        s.alpha_max = num(8);
        s.alpha_min = num(9);
        s.nz_max = num(10);
        s.nz_min = num(11);
        s.q_max = num(12);
        s.q_min = num(13);
        for (std::size_t i = 0; i < 3; ++i) s.longest_violation[i] = num(14 + i);
        for (std::size_t i = 0; i < 3; ++i) s.max_exceedance[i] = num(17 + i);
        s.tracking_rms = num(20);
        s.total_reward = num(21);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace rlfep
