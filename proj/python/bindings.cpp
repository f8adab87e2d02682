#include "rlfep/app.hpp"
#include "rlfep/config.hpp"
#include "rlfep/harness.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace rlfep;

namespace {

WorkbenchConfig config_from(const std::optional<std::string>& json_text) {
    return json_text ? WorkbenchConfig::from_json_text(*json_text) : WorkbenchConfig::defaults();
}

std::vector<double> obs_list(const Observation& o) { return {o.begin(), o.end()}; }

Observation obs_array(const std::vector<double>& v) {
    if (v.size() != kObsDim) throw py::value_error("observation must have 7 entries");
    Observation o{};
    std::copy(v.begin(), v.end(), o.begin());
    return o;
}

py::dict reward_dict(const RewardBreakdown& r) {
    py::dict d;
    d["survival"] = r.survival;
    d["tracking"] = r.tracking;
    d["alpha"] = r.alpha;
    d["nz"] = r.nz;
    d["q"] = r.q;
    d["penalty"] = r.penalty;
    d["total"] = r.total;
    d["done"] = r.done;
    return d;
}

py::dict summary_dict(const EpisodeSummary& s) {
    py::dict d;
    d["scenario"] = s.scenario;
    d["mode"] = to_string(s.mode);
    d["steps"] = s.steps;
    d["duration"] = s.duration;
    d["reason"] = to_string(s.reason);
    d["error"] = s.error;
    d["total_reward"] = s.total_reward;
    d["alpha_max"] = s.alpha_max;
    d["alpha_min"] = s.alpha_min;
    d["nz_max"] = s.nz_max;
    d["nz_min"] = s.nz_min;
    d["q_max"] = s.q_max;
    d["q_min"] = s.q_min;
    d["longest_violation"] = s.longest_violation;
    d["max_exceedance"] = s.max_exceedance;
    d["tracking_rms"] = s.tracking_rms;
    d["failed"] = s.failed;
    return d;
}

// Column-oriented copy of an episode log.
py::dict log_dict(const EpisodeLog& log) {
    std::map<std::string, std::vector<double>> c;
    for (const auto& r : log.rows) {
        c["t"].push_back(r.t);
        c["alpha_deg"].push_back(r.alpha_deg);
        c["nz"].push_back(r.nz);
        c["p"].push_back(r.p);
        c["q"].push_back(r.q);
        c["r"].push_back(r.r);
        c["phi"].push_back(r.phi);
        c["theta"].push_back(r.theta);
        c["q_cmd"].push_back(r.q_cmd);
        c["q_rest"].push_back(r.q_rest);
        c["q_total"].push_back(r.q_total);
        c["action"].push_back(r.action);
        c["reward"].push_back(r.reward.total);
    }
    py::dict d;
    d["summary"] = summary_dict(log.summary);
    d["columns"] = c;
    return d;
}

ProtectionMode mode_from(const std::string& m) { return parse_mode(m); }

std::optional<Policy> policy_from(const std::optional<std::string>& checkpoint) {
    if (!checkpoint) return std::nullopt;
    return Policy::load(*checkpoint);
}

// Owns its vehicle so Python never sees a dangling reference.
class PyEnv {
public:
    PyEnv(const std::optional<std::string>& config_json, const std::string& mode, std::optional<double> q_cmd,
          double p_cmd, std::uint64_t seed) {
        const WorkbenchConfig cfg = config_from(config_json);
        EnvConfig ec = cfg.env;
        ec.mode = mode_from(mode);
        ec.seed = seed;
        if (q_cmd) {
            ec.random_pitch_command = false;
            ec.profile = CommandProfile::constant(p_cmd, *q_cmd, 0.0, ec.duration);
        } else {
            ec.random_pitch_command = true;
        }
        env_ = std::make_unique<ProtectionEnv>(build_vehicle(cfg), ec);
    }

    std::vector<double> reset(std::optional<std::uint64_t> seed) { return obs_list(env_->reset(seed)); }

    py::tuple step(double action) {
        const StepResult r = env_->step(action);
        py::dict info;
        info["time"] = r.info.time;
        info["q_rest"] = r.info.q_rest;
        info["q_total"] = r.info.q_total;
        info["alpha_deg"] = rad2deg(r.info.condition.alpha);
        info["nz"] = r.info.condition.load_factor;
        info["reward"] = reward_dict(r.info.reward);
        info["violation"] = r.info.violation;
        info["terminated"] = r.info.terminated;
        info["truncated"] = r.info.truncated;
        info["reason"] = to_string(r.info.reason);
        return py::make_tuple(obs_list(r.observation), r.reward, r.done, info);
    }

    double apply_action(double a) const { return env_->apply_action(a); }
    double trim_alpha_deg() const { return env_->trim().alpha_deg; }
    bool done() const { return env_->done(); }
    double time() const { return env_->time(); }

private:
    std::unique_ptr<ProtectionEnv> env_;
};

}  // namespace

PYBIND11_MODULE(_rlfep, m) {
    m.doc() = "Flight envelope protection workbench (compiled core)";
    m.attr("OBS_DIM") = static_cast<int>(kObsDim);
    m.attr("CHECKPOINT_VERSION") = kCheckpointVersion;

    // Translators are tried newest first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);

    m.def("default_config_json", [] { return WorkbenchConfig::defaults().to_json_text(); });
    m.def("normalize_config_json", [](const std::string& text) { return WorkbenchConfig::from_json_text(text).to_json_text(); },
          "Parses, validates and re-serializes a config with every default filled in.");

    m.def("r_tracking", [](double q, double q_cmd, double eps) { return r_tracking(q, q_cmd, eps); }, py::arg("q"),
          py::arg("q_cmd"), py::arg("epsilon") = rad2deg(RewardWeights{}.epsilon));
    m.def("r_alpha", &r_alpha, py::arg("alpha"), py::arg("alpha_max"));
    m.def("r_nz", &r_nz, py::arg("nz"), py::arg("nz_max"));
    m.def("r_q", &r_q, py::arg("q"), py::arg("q_max"));

    m.def(
        "trim",
        [](const std::optional<std::string>& cfg_json) {
            const WorkbenchConfig cfg = config_from(cfg_json);
            const auto v = build_vehicle(cfg);
            const TrimResult t = trim_level_flight(*v, cfg.env.trim_mach, cfg.env.trim_altitude);
            py::dict d;
            d["alpha_deg"] = t.alpha_deg;
            d["tail_deg"] = t.deflections_deg.y();
            d["thrust_setting"] = t.thrust_setting;
            d["thrust_n"] = t.thrust_n;
            d["residuals"] = std::vector<double>{t.residuals.x(), t.residuals.y(), t.residuals.z()};
            d["iterations"] = t.iterations;
            return d;
        },
        py::arg("config_json") = py::none());

    py::class_<PyEnv>(m, "Env")
        .def(py::init<const std::optional<std::string>&, const std::string&, std::optional<double>, double,
                      std::uint64_t>(),
             py::arg("config_json") = py::none(), py::arg("mode") = "rl", py::arg("q_cmd") = py::none(),
             py::arg("p_cmd") = 0.0, py::arg("seed") = 0)
        .def("reset", &PyEnv::reset, py::arg("seed") = py::none())
        .def("step", &PyEnv::step, py::arg("action"), "Returns (observation, reward, done, info).")
        .def("apply_action", &PyEnv::apply_action)
        .def_property_readonly("trim_alpha_deg", &PyEnv::trim_alpha_deg)
        .def_property_readonly("done", &PyEnv::done)
        .def_property_readonly("time", &PyEnv::time);

    py::class_<Policy>(m, "Policy")
        .def(py::init([](const std::string& path) { return Policy::load(path); }), py::arg("checkpoint"))
        .def("__call__", [](const Policy& p, const std::vector<double>& obs) { return p(obs_array(obs)); });

    m.def(
        "run_scenario",
        [](const std::string& name, const std::string& mode, const std::optional<std::string>& checkpoint,
           const std::optional<std::string>& cfg_json) {
            const WorkbenchConfig cfg = config_from(cfg_json);
            const auto it = cfg.scenarios.find(name);
            if (it == cfg.scenarios.end()) throw py::key_error("unknown scenario " + name);
            const auto policy = policy_from(checkpoint);
            EpisodeLog log;
            {
                py::gil_scoped_release release;
                log = run_scenario(cfg, it->second, mode_from(mode), policy ? &*policy : nullptr);
            }
            return log_dict(log);
        },
        py::arg("name"), py::arg("mode") = "classical", py::arg("checkpoint") = py::none(),
        py::arg("config_json") = py::none());

    m.def(
        "sweep",
        [](const std::string& mode, const std::optional<std::string>& checkpoint, double p_cmd, int jobs,
           const std::optional<std::string>& cfg_json) {
            const WorkbenchConfig cfg = config_from(cfg_json);
            SweepSpec spec = cfg.sweep;
            spec.p_cmd = p_cmd;
            const auto policy = policy_from(checkpoint);
            std::vector<SweepRow> rows;
            {
                py::gil_scoped_release release;
                rows = sweep(cfg, spec, mode_from(mode), policy ? &*policy : nullptr, jobs);
            }
            py::list out;
            for (const auto& r : rows) {
                py::dict d = summary_dict(r.summary);
                d["q_cmd"] = r.q_cmd;
                d["p_cmd"] = r.p_cmd;
                out.append(d);
            }
            return out;
        },
        py::arg("mode") = "classical", py::arg("checkpoint") = py::none(), py::arg("p_cmd") = 0.0,
        py::arg("jobs") = 1, py::arg("config_json") = py::none());

    m.def(
        "train",
        [](const std::string& out_dir, std::optional<int> episodes, std::optional<std::uint64_t> seed,
           const std::optional<std::string>& cfg_json) {
            const WorkbenchConfig cfg = config_from(cfg_json);
            TrainOptions opt;
            opt.max_episodes = episodes;
            opt.seed = seed;
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = train(cfg, out_dir, opt);
            }
            py::dict d;
            d["episodes"] = r.episodes;
            d["reached_stop_value"] = r.reached_stop_value;
            d["final_average"] = r.final_average;
            d["checkpoint"] = r.checkpoint.string();
            d["metrics"] = r.metrics.string();
            d["parameter_hash"] = r.parameter_hash;
            return d;
        },
        py::arg("out_dir"), py::arg("episodes") = py::none(), py::arg("seed") = py::none(),
        py::arg("config_json") = py::none());

    m.def("file_hash", [](const std::string& path) { return file_hash(path); });
}
