#include "rlfep/app.hpp"

#include "rlfep/csv.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#ifndef RLFEP_GIT_DESCRIBE
#define RLFEP_GIT_DESCRIBE "unknown"
#endif

namespace rlfep {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr int kManifestVersion = 1;

std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error("cannot open " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Json request_to_json(const RunRequest& r) {
    Json j;
    j["command"] = r.command;
    j["scenario"] = r.scenario;
    j["mode"] = r.mode ? Json(to_string(*r.mode)) : Json(nullptr);
    j["checkpoint"] = r.checkpoint ? Json(r.checkpoint->string()) : Json(nullptr);
    j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
    j["out_dir"] = r.out_dir.string();
    j["jobs"] = r.jobs;
    j["p_cmd"] = r.p_cmd ? Json(*r.p_cmd) : Json(nullptr);
    j["episodes"] = r.episodes ? Json(*r.episodes) : Json(nullptr);
    j["logs"] = r.logs;
    j["input"] = r.input ? Json(r.input->string()) : Json(nullptr);
    return j;
}

RunRequest request_from_json(const Json& j) {
    RunRequest r;
    r.command = j.at("command").get<std::string>();
    r.scenario = j.at("scenario").get<std::string>();
    if (!j.at("mode").is_null()) r.mode = parse_mode(j.at("mode").get<std::string>());
    if (!j.at("checkpoint").is_null()) r.checkpoint = j.at("checkpoint").get<std::string>();
    if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
    r.out_dir = j.at("out_dir").get<std::string>();
    r.jobs = j.at("jobs").get<int>();
    if (!j.at("p_cmd").is_null()) r.p_cmd = j.at("p_cmd").get<double>();
    if (!j.at("episodes").is_null()) r.episodes = j.at("episodes").get<int>();
    r.logs = j.at("logs").get<bool>();
    if (!j.at("input").is_null()) r.input = j.at("input").get<std::string>();
    return r;
}

// Every file under out_dir except the manifest, keyed by relative path.
std::map<std::string, std::string> output_hashes(const std::filesystem::path& dir) {
    std::map<std::string, std::string> h;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(e.path(), dir).generic_string();
        if (rel == kManifestName) continue;
        h[rel] = file_hash(e.path());
    }
    return h;
}

std::string model_source(const WorkbenchConfig& config) {
    return config.aero.model == "table" ? "table-set:" + config.aero.table_dir : "polynomial-surrogate";
}

void write_manifest(const RunRequest& req, const WorkbenchConfig& config, const std::vector<std::string>& argv,
                    int exit_code) {
    Json m;
    m["manifest_version"] = kManifestVersion;
    m["tool"] = "rlfep";
    m["git_describe"] = git_describe();
    m["argv"] = argv;
    m["request"] = request_to_json(req);
    m["config_hash"] = hex64(config.hash());
    m["config"] = Json::parse(config.to_json_text());
    m["model_source"] = model_source(config);
    Json seeds;
    seeds["training"] = req.seed.value_or(config.training.seed);
    seeds["sweep"] = req.seed.value_or(config.sweep.seed);
    seeds["environment"] = req.seed.value_or(0);
    m["seeds"] = seeds;
    if (req.checkpoint) m["checkpoint_hash"] = file_hash(*req.checkpoint);
    if (req.input) m["input_hash"] = file_hash(*req.input);
    m["exit_code"] = exit_code;
    Json outs = Json::object();
    for (const auto& [k, v] : output_hashes(req.out_dir)) outs[k] = v;
    m["outputs"] = outs;
    std::ofstream f(req.out_dir / kManifestName);
    if (!f) throw Error("cannot write manifest in " + req.out_dir.string());
    f << m.dump(2) << "\n";
}

ProtectionMode resolve_mode(const RunRequest& req, const Scenario* scenario) {
    if (req.mode) return *req.mode;
    if (scenario && scenario->mode) return *scenario->mode;
    return req.checkpoint ? ProtectionMode::rl : ProtectionMode::classical;
}

std::optional<Policy> load_policy(const RunRequest& req, ProtectionMode mode) {
    if (mode != ProtectionMode::rl) return std::nullopt;
    if (!req.checkpoint) throw ConfigError("rl mode needs --checkpoint");
    return Policy::load(*req.checkpoint);
}

int run_trim(const RunRequest& req, const WorkbenchConfig& config, std::ostream& out) {
    const auto vehicle = build_vehicle(config);
    const TrimResult t = trim_level_flight(*vehicle, config.env.trim_mach, config.env.trim_altitude);
    CsvWriter w(req.out_dir / "trim.csv", {"mach", "altitude_m", "airspeed_m_s", "alpha_deg", "tail_deg",
                                          "thrust_setting", "thrust_n", "residual_u", "residual_w", "residual_q",
                                          "iterations"});
    w << config.env.trim_mach << config.env.trim_altitude << t.state.airspeed() << t.alpha_deg
      << t.deflections_deg.y() << t.thrust_setting << t.thrust_n << t.residuals.x() << t.residuals.y()
      << t.residuals.z() << t.iterations;
    w.end_row();
    out << "trim at Mach " << format_double(config.env.trim_mach) << ", " << format_double(config.env.trim_altitude)
        << " m: alpha " << format_double(t.alpha_deg) << " deg, tail " << format_double(t.deflections_deg.y())
        << " deg, thrust " << format_double(t.thrust_n) << " N (setting " << format_double(t.thrust_setting)
        << "), " << t.iterations << " iterations, max residual " << format_double(t.residuals.cwiseAbs().maxCoeff())
        << "\n";
    return kExitPass;
}

int run_fly(const RunRequest& req, const WorkbenchConfig& config, std::ostream& out) {
    const auto it = config.scenarios.find(req.scenario);
    if (it == config.scenarios.end()) throw ConfigError("unknown scenario '" + req.scenario + "'");
    const ProtectionMode mode = resolve_mode(req, &it->second);
    const auto policy = load_policy(req, mode);
    const EpisodeLog log =
        run_scenario(config, it->second, mode, policy ? &*policy : nullptr, req.seed.value_or(0));
    write_episode_csv(log, req.out_dir / "episode.csv");
    std::ostringstream s;
    write_summary(log.summary, s);
    out << s.str();
    std::ofstream(req.out_dir / "summary.txt") << s.str();
    return log.summary.failed ? kExitViolations : kExitPass;
}

int run_train(const RunRequest& req, const WorkbenchConfig& config, std::ostream& out) {
    TrainOptions opt;
    opt.max_episodes = req.episodes;
    opt.seed = req.seed;
    opt.on_episode = [&out](const EpisodeMetrics& m) {
        if ((m.episode + 1) % 50 == 0) {
            out << "episode " << m.episode + 1 << ": moving average " << format_double(m.average_reward) << "\n";
            out.flush();
        }
        return true;
    };
    const TrainResult r = train(config, req.out_dir, opt);
    out << "trained " << r.episodes << " episodes, moving average " << format_double(r.final_average)
        << (r.clean_validation     ? " (every validation run passed)"
            : r.reached_stop_value ? " (stop value reached)"
                                   : " (episode cap reached)")
        << "\n";
    if (r.best_episode >= 0) {
        out << "best validation after episode " << r.best_episode + 1 << ", passes";
        for (int n : r.best_passed) out << " " << n;
        out << "\n";
    }
    out << "checkpoint " << r.checkpoint.string() << "\n";
    return kExitPass;
}

void write_sweep_report(const std::vector<SweepRow>& rows, const SweepSpec& spec, ProtectionMode mode,
                        std::ostream& os) {
    const SweepAggregate a = aggregate(rows);
    os << "sweep q_cmd " << format_double(spec.q_min) << ":" << format_double(spec.increment) << ":"
       << format_double(spec.q_max) << " deg/s, p_cmd " << format_double(spec.p_cmd) << " deg/s, mode "
       << to_string(mode) << "\n"
       << "passed " << a.passed << " of " << a.runs << " runs (" << format_double(100.0 * a.pass_rate) << "%)\n";
    for (int i : a.failed_indices) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        const auto& s = r.summary;
        os << "  FAIL q_cmd " << format_double(r.q_cmd) << ": " << to_string(s.reason) << ", violation alpha "
           << format_double(s.longest_violation[0]) << " s, n_z " << format_double(s.longest_violation[1])
           << " s, q " << format_double(s.longest_violation[2]) << " s\n";
    }
}

int run_sweep(const RunRequest& req, const WorkbenchConfig& config, std::ostream& out) {
    SweepSpec spec = config.sweep;
    if (req.p_cmd) spec.p_cmd = *req.p_cmd;
    if (req.seed) spec.seed = *req.seed;
    const ProtectionMode mode = resolve_mode(req, nullptr);
    const auto policy = load_policy(req, mode);
    std::optional<std::filesystem::path> logs;
    if (req.logs) logs = req.out_dir / "runs";
    const auto rows = sweep(config, spec, mode, policy ? &*policy : nullptr, req.jobs, logs);
    write_sweep_csv(rows, req.out_dir / "sweep.csv");
    std::ostringstream s;
    write_sweep_report(rows, spec, mode, s);
    out << s.str();
    std::ofstream(req.out_dir / "summary.txt") << s.str();
    return aggregate(rows).failed_indices.empty() ? kExitPass : kExitViolations;
}

int run_plot(const RunRequest& req, const WorkbenchConfig& config, std::ostream& out) {
    if (!req.input) throw ConfigError("plot needs --input <episode.csv | sweep.csv>");
    std::ifstream in(*req.input);
    if (!in) throw ParseError("cannot open " + req.input->string(), 0);
    std::string header;
    std::getline(in, header);
    std::vector<std::filesystem::path> files;
    if (header.rfind("index,", 0) == 0) {
        std::optional<std::filesystem::path> logs;
        const auto runs = req.input->parent_path() / "runs";
        if (std::filesystem::is_directory(runs)) logs = runs;
        files = plot_sweep(*req.input, req.out_dir, config.env.limits, logs);
    } else {
        files = plot_episode(*req.input, req.out_dir, config.env.limits);
    }
    for (const auto& f : files) out << "wrote " << f.string() << "\n";
    return kExitPass;
}

}  // namespace

std::string file_hash(const std::filesystem::path& path) { return hex64(fnv1a(read_file(path))); }

std::string git_describe() { return RLFEP_GIT_DESCRIBE; }

int execute(const RunRequest& request, const WorkbenchConfig& config, const std::vector<std::string>& argv,
            std::ostream& out) {
    if (request.jobs < 1) throw ConfigError("--jobs must be at least 1");
    std::filesystem::create_directories(request.out_dir);
    int code = kExitError;
    if (request.command == "trim") {
        code = run_trim(request, config, out);
    } else if (request.command == "fly") {
        code = run_fly(request, config, out);
    } else if (request.command == "train") {
        code = run_train(request, config, out);
    } else if (request.command == "sweep") {
        code = run_sweep(request, config, out);
    } else if (request.command == "plot") {
        code = run_plot(request, config, out);
    } else {
        throw ConfigError("unknown command '" + request.command + "'");
    }
    write_manifest(request, config, argv, code);
    return code;
}

int replay(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir, std::ostream& out) {
    Json m;
    try {
        m = Json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(manifest_path.string() + " is not a valid manifest: " + e.what(), 0);
    }
    if (m.value("manifest_version", 0) != kManifestVersion) throw ParseError("unsupported manifest version", 0);
    const WorkbenchConfig config = WorkbenchConfig::from_json_text(m.at("config").dump());
    if (hex64(config.hash()) != m.at("config_hash").get<std::string>()) {
        throw ConfigError("embedded config does not match its recorded hash");
    }
    RunRequest req = request_from_json(m.at("request"));
    if (req.checkpoint && m.contains("checkpoint_hash") &&
        file_hash(*req.checkpoint) != m.at("checkpoint_hash").get<std::string>()) {
        throw CheckpointError("checkpoint " + req.checkpoint->string() + " changed since the recorded run");
    }
    if (req.input && m.contains("input_hash") && file_hash(*req.input) != m.at("input_hash").get<std::string>()) {
        throw ParseError("plot input " + req.input->string() + " changed since the recorded run", 0);
    }
    if (std::filesystem::exists(out_dir) && std::filesystem::exists(req.out_dir) &&
        std::filesystem::equivalent(out_dir, req.out_dir)) {
        throw ConfigError("replay needs a fresh output directory");
    }
    req.out_dir = out_dir;
    std::ostringstream sink;
    const int code = execute(req, config, m.at("argv").get<std::vector<std::string>>(), sink);
    const auto recorded = m.at("outputs");
    const auto now = output_hashes(out_dir);
    int mismatches = 0;
    for (auto it = recorded.begin(); it != recorded.end(); ++it) {
        const auto found = now.find(it.key());
        const bool same = found != now.end() && found->second == it.value().get<std::string>();
        out << (same ? "identical " : "DIFFERS   ") << it.key() << "\n";
        if (!same) ++mismatches;
    }
    for (const auto& [k, v] : now) {
        if (!recorded.contains(k)) {
            out << "EXTRA     " << k << "\n";
            ++mismatches;
        }
    }
    if (code != m.at("exit_code").get<int>()) {
        out << "exit code " << code << " differs from recorded " << m.at("exit_code").get<int>() << "\n";
        ++mismatches;
    }
    out << (mismatches == 0 ? "replay reproduced all outputs bit-identically\n"
                            : std::to_string(mismatches) + " output(s) differ\n");
    return mismatches == 0 ? kExitPass : kExitError;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Flight-envelope-protection workbench: simulate, train and evaluate"};
    app.require_subcommand(1);
    std::vector<std::string> args(argv, argv + argc);

    RunRequest req;
    std::string config_path;
    std::string mode_text;
    std::string checkpoint;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string input;
    std::string manifest;
    double p_cmd = 0.0;
    int episodes = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (defaults apply to missing keys)")
            ->check(CLI::ExistingFile);
        sub->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    };
    auto with_mode = [&](CLI::App* sub) {
        sub->add_option("--mode", mode_text, "Protection mode")->check(CLI::IsMember({"none", "classical", "rl"}));
        sub->add_option("--checkpoint", checkpoint, "Trained agent (required for --mode rl)")
            ->check(CLI::ExistingFile);
    };

    auto* trim = app.add_subcommand("trim", "Trim for level flight at the configured condition");
    common(trim);
    auto* fly = app.add_subcommand("fly", "Fly one scenario and log it");
    common(fly);
    with_mode(fly);
    fly->add_option("--scenario", req.scenario, "Scenario name from the config (1, 2, 3 built in)")
        ->capture_default_str();
    fly->add_option("--seed", seed, "Environment seed");
    auto* trn = app.add_subcommand("train", "Train the agent");
    common(trn);
    trn->add_option("--seed", seed, "Training seed (overrides the config)");
    trn->add_option("--episodes", episodes, "Episode cap (overrides the config)")->check(CLI::PositiveNumber);
    auto* swp = app.add_subcommand("sweep", "Pitch-command sweep, one episode per command");
    common(swp);
    with_mode(swp);
    swp->add_option("--seed", seed, "Base seed for per-run seeds");
    swp->add_option("--jobs", req.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    swp->add_option("--p-cmd", p_cmd, "Constant roll-rate command [deg/s] (60 for the coupled sweep)");
    swp->add_flag("--logs", req.logs, "Also write each run's episode CSV under runs/");
    auto* plt = app.add_subcommand("plot", "SVG plots from an episode or sweep CSV");
    common(plt);
    plt->add_option("--input", input, "episode.csv or sweep.csv")->required()->check(CLI::ExistingFile);
    auto* rep = app.add_subcommand("replay", "Rerun a manifest and compare outputs byte for byte");
    rep->add_option("manifest", manifest, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
    rep->add_option("--out-dir", out_dir, "Fresh output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitError;
    }

    try {
        if (rep->parsed()) return replay(manifest, out_dir, std::cout);
        CLI::App* used = app.get_subcommands().front();
        req.command = used->get_name();
        req.out_dir = out_dir;
        if (!mode_text.empty()) req.mode = parse_mode(mode_text);
        if (!checkpoint.empty()) req.checkpoint = std::filesystem::absolute(checkpoint);
        auto given = [used](const char* name) {
            const CLI::Option* o = used->get_option_no_throw(name);
            return o != nullptr && o->count() > 0;
        };
        if (given("--seed")) req.seed = seed;
        if (given("--p-cmd")) req.p_cmd = p_cmd;
        if (given("--episodes")) req.episodes = episodes;
        if (!input.empty()) req.input = std::filesystem::absolute(input);
        const WorkbenchConfig config =
            config_path.empty() ? WorkbenchConfig::defaults() : WorkbenchConfig::load(config_path);
        return execute(req, config, args, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace rlfep
