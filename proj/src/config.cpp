#include "rlfep/config.hpp"

#include "rlfep/csv.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace rlfep {

using Json = nlohmann::ordered_json;

namespace {

// Reads keys from one JSON object and rejects any key nobody asked for, so a
// typo in a config file fails loudly instead of silently using a default.
class Section {
public:
    Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(path_ + "." + key + " has the wrong type");
        }
    }

    /// Doubles additionally accept null for infinity.
    void get_unbounded(const std::string& key, double& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        if (j_.at(key).is_null()) {
            out = std::numeric_limits<double>::infinity();
            return;
        }
        get(key, out);
    }

    const Json& child(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string path(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError("unknown key " + path_ + "." + it.key());
        }
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

PiecewiseProfile profile_from_json(const Json& j, double duration, const std::string& where) {
    if (j.is_number()) return PiecewiseProfile::constant(j.get<double>(), duration);
    if (!j.is_array()) throw ConfigError(where + " must be a number or a list of [start, end, from, to] segments");
    std::vector<Segment> segs;
    for (const auto& s : j) {
        if (!s.is_array() || s.size() != 4) throw ConfigError(where + " segments must be [start, end, from, to]");
        try {
            segs.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>(), s[3].get<double>()});
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(where + " segment values must be numbers");
        }
    }
    return PiecewiseProfile(std::move(segs));
}

Json profile_to_json(const PiecewiseProfile& p) {
    Json a = Json::array();
    for (const auto& s : p.segments()) a.push_back({s.start, s.end, s.from, s.to});
    return a;
}

Json limits_to_json(const ActuatorLimits& a) {
    return {{"time_constant", a.time_constant}, {"rate_limit", a.rate_limit}, {"position_limit", a.position_limit}};
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void SweepSpec::validate() const {
    if (!(increment > 0.0)) throw ConfigError("sweep increment must be positive");
    if (!(q_max >= q_min)) throw ConfigError("sweep range is empty");
    if (!std::isfinite(p_cmd)) throw ConfigError("sweep p_cmd must be finite");
}

std::vector<double> SweepSpec::commands() const {
    validate();
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((q_max - q_min) / increment + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(q_min + static_cast<double>(i) * increment);
    return out;
}

void TrainingSettings::validate() const {
    if (max_episodes < 1) throw ConfigError("training.max_episodes must be at least 1");
    if (min_episodes < 0) throw ConfigError("training.min_episodes must be >= 0");
    if (window < 1) throw ConfigError("training.window must be at least 1");
    if (checkpoint_every < 0) throw ConfigError("training.checkpoint_every must be >= 0");
    if (!(tracking_cap > 0.0)) throw ConfigError("training.tracking_cap must be positive");
    if (!(intervention_weight >= 0.0) || !std::isfinite(intervention_weight)) {
        throw ConfigError("training.intervention_weight must be >= 0");
    }
    if (!(q_cmd_max >= q_cmd_min)) throw ConfigError("training command range is empty");
    if (updates_per_step < 1) throw ConfigError("training.updates_per_step must be at least 1");
    if (!std::isfinite(stop_avg_reward)) throw ConfigError("training.stop_avg_reward must be finite");
    if (validate_every < 0) throw ConfigError("training.validate_every must be >= 0");
    if (validate_every > 0 && validation_p_cmd.empty()) throw ConfigError("training.validation_p_cmd is empty");
    for (double p : validation_p_cmd)
        if (!std::isfinite(p)) throw ConfigError("training.validation_p_cmd must be finite");
}

std::map<std::string, Scenario> default_scenarios(double duration) {
    std::map<std::string, Scenario> s;
    s["1"] = {"1", CommandProfile::constant(0.0, 25.0, 0.0, duration), std::nullopt};
    s["2"] = {"2", CommandProfile::constant(0.0, -10.0, 0.0, duration), std::nullopt};
    CommandProfile p3;
    p3.p = PiecewiseProfile::constant(60.0, duration);
    p3.q = PiecewiseProfile({{0.0, 4.0, 20.0, 20.0}, {4.0, 5.0, 20.0, -10.0}, {5.0, duration, -10.0, -10.0}});
    p3.r = PiecewiseProfile::constant(0.0, duration);
    s["3"] = {"3", p3, std::nullopt};
    return s;
}

WorkbenchConfig WorkbenchConfig::defaults() {
    WorkbenchConfig c;
    // Training recipe. The noise process itself defaults to 1e-3, which never
    // leaves the flat part of the command clamp; see docs/training.md.
    c.agent.noise_variance = 0.05;
    c.agent.preactivation_penalty = 0.01;
    c.env.weights.alpha = 50.0;
    c.env.weights.nz = 50.0;
    c.env.weights.q = 50.0;
    c.training.tracking_cap = 4.0;
    c.training.intervention_weight = 0.5;
    c.training.q_cmd_min = -15.0;
    c.training.q_cmd_max = 30.0;
    c.training.max_episodes = 1500;
    c.scenarios = default_scenarios(c.env.duration);
    return c;
}

void WorkbenchConfig::validate() const {
    if (aero.model != "surrogate" && aero.model != "table") {
        throw ConfigError("aero.model must be 'surrogate' or 'table'");
    }
    if (aero.model == "table" && aero.table_dir.empty()) throw ConfigError("aero.table_dir is required for tables");
    MassProperties{mass, inertia}.validate();
    if (!(max_thrust > 0.0)) throw ConfigError("max_thrust must be positive");
    for (const auto& a : actuators) {
        if (!(a.time_constant > 0.0) || !(a.rate_limit > 0.0) || !(a.position_limit > 0.0)) {
            throw ConfigError("actuator time constant, rate and position limits must be positive");
        }
    }
    if (!(integrator.max_dt > 0.0)) throw ConfigError("integrator.max_dt must be positive");
    if (env.agent_period / env.physics_substeps > integrator.max_dt + 1e-15) {
        throw ConfigError("physics step exceeds integrator.max_dt");
    }
    EnvConfig e = env;
    e.random_pitch_command = true;  // the pilot profile is per scenario
    e.validate();
    agent.validate();
    training.validate();
    sweep.validate();
    for (const auto& [name, s] : scenarios) {
        try {
            s.profile.validate(env.duration);
        } catch (const ConfigError& err) {
            throw ConfigError("scenario '" + name + "': " + err.what());
        }
    }
}

std::string WorkbenchConfig::to_json_text() const {
    Json j;
    j["aero"] = {{"model", aero.model}, {"table_dir", aero.table_dir}};
    j["airframe"] = {{"mass", mass},
                     {"ixx", inertia(0, 0)},
                     {"iyy", inertia(1, 1)},
                     {"izz", inertia(2, 2)},
                     {"ixz", -inertia(0, 2)},
                     {"max_thrust", max_thrust}};
    j["actuators"] = {{"aileron", limits_to_json(actuators[0])},
                      {"tail", limits_to_json(actuators[1])},
                      {"rudder", limits_to_json(actuators[2])}};
    j["simulation"] = {{"duration", env.duration},
                       {"agent_period", env.agent_period},
                       {"physics_substeps", env.physics_substeps},
                       {"max_dt", integrator.max_dt},
                       {"singularity_margin", integrator.singularity_margin},
                       {"trim_mach", env.trim_mach},
                       {"trim_altitude", env.trim_altitude},
                       {"action_min", env.action_min},
                       {"action_max", env.action_max}};
    const auto& l = env.limits;
    j["limits"] = {{"alpha_max", l.alpha_max},         {"alpha_min", l.alpha_min},
                   {"nz_max", l.nz_max},               {"nz_min", l.nz_min},
                   {"q_max", l.q_max},                 {"q_min", l.q_min},
                   {"fade_start_fraction", l.fade_start_fraction}, {"restore_gain", l.restore_gain},
                   {"qbar_floor", l.qbar_floor}};
    const auto& c = env.controller;
    j["controller"] = {{"gain_roll", c.gains.roll},
                       {"gain_pitch", c.gains.pitch},
                       {"gain_yaw", c.gains.yaw},
                       {"estimator_cutoff", c.estimator_cutoff},
                       {"effectivity_step_deg", c.effectivity_step_deg},
                       {"max_condition", c.max_condition},
                       {"perfect_sensor", c.perfect_sensor}};
    const auto& w = env.weights;
    j["reward"] = {{"survival", w.survival},
                   {"tracking", w.tracking},
                   {"alpha", w.alpha},
                   {"nz", w.nz},
                   {"q", w.q},
                   {"epsilon", w.epsilon},
                   {"sustained_penalty", w.sustained_penalty},
                   {"excess_penalty", w.excess_penalty},
                   {"integrity_penalty", w.integrity_penalty},
                   {"sustain_time", w.sustain_time},
                   {"excess_fraction", w.excess_fraction},
                   {"tracking_cap", number_or_null(w.tracking_cap)},
                   {"intervention", w.intervention}};
    j["agent"] = {{"actor_hidden", agent.actor_hidden},
                  {"critic_obs_hidden1", agent.critic_obs_hidden1},
                  {"critic_obs_hidden2", agent.critic_obs_hidden2},
                  {"critic_action_hidden", agent.critic_action_hidden},
                  {"actor_lr", agent.actor_lr},
                  {"critic_lr", agent.critic_lr},
                  {"gamma", agent.gamma},
                  {"tau", agent.tau},
                  {"buffer_capacity", agent.buffer_capacity},
                  {"batch_size", agent.batch_size},
                  {"warmup", agent.warmup},
                  {"noise_variance", agent.noise_variance},
                  {"noise_decay", agent.noise_decay},
                  {"optimizer", to_string(agent.optimizer)},
                  {"adam_beta1", agent.adam_beta1},
                  {"adam_beta2", agent.adam_beta2},
                  {"adam_epsilon", agent.adam_epsilon},
                  {"preactivation_penalty", agent.preactivation_penalty}};
    const auto& t = training;
    j["training"] = {{"seed", t.seed},
                     {"max_episodes", t.max_episodes},
                     {"min_episodes", t.min_episodes},
                     {"stop_avg_reward", t.stop_avg_reward},
                     {"window", t.window},
                     {"checkpoint_every", t.checkpoint_every},
                     {"tracking_cap", t.tracking_cap},
                     {"intervention_weight", t.intervention_weight},
                     {"q_cmd_min", t.q_cmd_min},
                     {"q_cmd_max", t.q_cmd_max},
                     {"updates_per_step", t.updates_per_step},
                     {"validate_every", t.validate_every},
                     {"validation_p_cmd", t.validation_p_cmd},
                     {"stop_on_clean_validation", t.stop_on_clean_validation}};
    j["sweep"] = {{"q_min", sweep.q_min},
                  {"q_max", sweep.q_max},
                  {"increment", sweep.increment},
                  {"p_cmd", sweep.p_cmd},
                  {"seed", sweep.seed}};
    Json sc = Json::object();
    for (const auto& [name, s] : scenarios) {
        Json o;
        if (s.mode) o["mode"] = to_string(*s.mode);
        o["p"] = profile_to_json(s.profile.p);
        o["q"] = profile_to_json(s.profile.q);
        o["r"] = profile_to_json(s.profile.r);
        sc[name] = o;
    }
    j["scenarios"] = sc;
    return j.dump(2);
}

std::uint64_t WorkbenchConfig::hash() const { return fnv1a(to_json_text()); }

WorkbenchConfig WorkbenchConfig::from_json_text(const std::string& text, const std::filesystem::path& base_dir) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    WorkbenchConfig c = defaults();
    Section top(root, "config");

    if (top.has("aero")) {
        Section s(top.child("aero"), "aero");
        s.get("model", c.aero.model);
        s.get("table_dir", c.aero.table_dir);
        s.finish();
        if (c.aero.model == "table" && !c.aero.table_dir.empty() && !base_dir.empty() &&
            std::filesystem::path(c.aero.table_dir).is_relative()) {
            c.aero.table_dir = (base_dir / c.aero.table_dir).lexically_normal().string();
        }
    }
    if (top.has("airframe")) {
        Section s(top.child("airframe"), "airframe");
        double ixx = c.inertia(0, 0), iyy = c.inertia(1, 1), izz = c.inertia(2, 2), ixz = -c.inertia(0, 2);
        s.get("mass", c.mass);
        s.get("ixx", ixx);
        s.get("iyy", iyy);
        s.get("izz", izz);
        s.get("ixz", ixz);
        s.get("max_thrust", c.max_thrust);
        s.finish();
        c.inertia << ixx, 0.0, -ixz, 0.0, iyy, 0.0, -ixz, 0.0, izz;
    }
    if (top.has("actuators")) {
        Section s(top.child("actuators"), "actuators");
        const char* names[3] = {"aileron", "tail", "rudder"};
        for (int i = 0; i < 3; ++i) {
            if (!s.has(names[i])) {
                s.get(names[i], c.actuators[i].time_constant);  // marks the key as known
                continue;
            }
            Section a(s.child(names[i]), s.path(names[i]));
            a.get("time_constant", c.actuators[i].time_constant);
            a.get("rate_limit", c.actuators[i].rate_limit);
            a.get("position_limit", c.actuators[i].position_limit);
            a.finish();
        }
        s.finish();
    }
    if (top.has("simulation")) {
        Section s(top.child("simulation"), "simulation");
        s.get("duration", c.env.duration);
        s.get("agent_period", c.env.agent_period);
        s.get("physics_substeps", c.env.physics_substeps);
        s.get("max_dt", c.integrator.max_dt);
        s.get("singularity_margin", c.integrator.singularity_margin);
        s.get("trim_mach", c.env.trim_mach);
        s.get("trim_altitude", c.env.trim_altitude);
        s.get("action_min", c.env.action_min);
        s.get("action_max", c.env.action_max);
        s.finish();
        // Built-in scenarios follow the episode length.
        c.scenarios = default_scenarios(c.env.duration);
    }
    if (top.has("limits")) {
        Section s(top.child("limits"), "limits");
        auto& l = c.env.limits;
        s.get("alpha_max", l.alpha_max);
        s.get("alpha_min", l.alpha_min);
        s.get("nz_max", l.nz_max);
        s.get("nz_min", l.nz_min);
        s.get("q_max", l.q_max);
        s.get("q_min", l.q_min);
        s.get("fade_start_fraction", l.fade_start_fraction);
        s.get("restore_gain", l.restore_gain);
        s.get("qbar_floor", l.qbar_floor);
        s.finish();
    }
    if (top.has("controller")) {
        Section s(top.child("controller"), "controller");
        auto& k = c.env.controller;
        s.get("gain_roll", k.gains.roll);
        s.get("gain_pitch", k.gains.pitch);
        s.get("gain_yaw", k.gains.yaw);
        s.get("estimator_cutoff", k.estimator_cutoff);
        s.get("effectivity_step_deg", k.effectivity_step_deg);
        s.get("max_condition", k.max_condition);
        s.get("perfect_sensor", k.perfect_sensor);
        s.finish();
    }
    if (top.has("reward")) {
        Section s(top.child("reward"), "reward");
        auto& w = c.env.weights;
        s.get("survival", w.survival);
        s.get("tracking", w.tracking);
        s.get("alpha", w.alpha);
        s.get("nz", w.nz);
        s.get("q", w.q);
        s.get("epsilon", w.epsilon);
        s.get("sustained_penalty", w.sustained_penalty);
        s.get("excess_penalty", w.excess_penalty);
        s.get("integrity_penalty", w.integrity_penalty);
        s.get("sustain_time", w.sustain_time);
        s.get("excess_fraction", w.excess_fraction);
        s.get_unbounded("tracking_cap", w.tracking_cap);
        s.get("intervention", w.intervention);
        s.finish();
    }
    if (top.has("agent")) {
        Section s(top.child("agent"), "agent");
        auto& a = c.agent;
        s.get("actor_hidden", a.actor_hidden);
        s.get("critic_obs_hidden1", a.critic_obs_hidden1);
        s.get("critic_obs_hidden2", a.critic_obs_hidden2);
        s.get("critic_action_hidden", a.critic_action_hidden);
        s.get("actor_lr", a.actor_lr);
        s.get("critic_lr", a.critic_lr);
        s.get("gamma", a.gamma);
        s.get("tau", a.tau);
        s.get("buffer_capacity", a.buffer_capacity);
        s.get("batch_size", a.batch_size);
        s.get("warmup", a.warmup);
        s.get("noise_variance", a.noise_variance);
        s.get("noise_decay", a.noise_decay);
        std::string opt = to_string(a.optimizer);
        s.get("optimizer", opt);
        a.optimizer = parse_optimizer(opt);
        s.get("adam_beta1", a.adam_beta1);
        s.get("adam_beta2", a.adam_beta2);
        s.get("preactivation_penalty", a.preactivation_penalty);
        s.get("adam_epsilon", a.adam_epsilon);
        s.finish();
    }
    if (top.has("training")) {
        Section s(top.child("training"), "training");
        auto& t = c.training;
        s.get("seed", t.seed);
        s.get("max_episodes", t.max_episodes);
        s.get("min_episodes", t.min_episodes);
        s.get("stop_avg_reward", t.stop_avg_reward);
        s.get("window", t.window);
        s.get("checkpoint_every", t.checkpoint_every);
        s.get("tracking_cap", t.tracking_cap);
        s.get("intervention_weight", t.intervention_weight);
        s.get("q_cmd_min", t.q_cmd_min);
        s.get("q_cmd_max", t.q_cmd_max);
        s.get("updates_per_step", t.updates_per_step);
        s.get("validate_every", t.validate_every);
        s.get("validation_p_cmd", t.validation_p_cmd);
        s.get("stop_on_clean_validation", t.stop_on_clean_validation);
        s.finish();
    }
    if (top.has("sweep")) {
        Section s(top.child("sweep"), "sweep");
        s.get("q_min", c.sweep.q_min);
        s.get("q_max", c.sweep.q_max);
        s.get("increment", c.sweep.increment);
        s.get("p_cmd", c.sweep.p_cmd);
        s.get("seed", c.sweep.seed);
        s.finish();
    }
    if (top.has("scenarios")) {
        const Json& sc = top.child("scenarios");
        if (!sc.is_object()) throw ConfigError("scenarios must be an object keyed by name");
        for (auto it = sc.begin(); it != sc.end(); ++it) {
            const std::string where = "scenarios." + it.key();
            Section s(it.value(), where);
            Scenario scen{it.key(), CommandProfile::constant(0.0, 0.0, 0.0, c.env.duration), std::nullopt};
            if (s.has("mode")) {
                std::string m;
                s.get("mode", m);
                scen.mode = parse_mode(m);
            }
            for (const char* axis : {"p", "q", "r"}) {
                if (!s.has(axis)) continue;
                auto prof = profile_from_json(s.child(axis), c.env.duration, where + "." + axis);
                if (axis[0] == 'p') scen.profile.p = prof;
                if (axis[0] == 'q') scen.profile.q = prof;
                if (axis[0] == 'r') scen.profile.r = prof;
            }
            s.finish();
            c.scenarios[it.key()] = scen;
        }
    }
    top.finish();
    c.validate();
    return c;
}

WorkbenchConfig WorkbenchConfig::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return from_json_text(ss.str(), path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::shared_ptr<const Vehicle> build_vehicle(const WorkbenchConfig& config) {
    std::shared_ptr<const AeroModel> aero;
    if (config.aero.model == "table") {
        aero = TableAeroModel::load(config.aero.table_dir, Geometry{}, AeroEnvelope{});
    } else {
        aero = std::make_shared<SurrogateAeroModel>();
    }
    return std::make_shared<Vehicle>(aero, MassProperties{config.mass, config.inertia}, ThrustModel{config.max_thrust},
                                     config.actuators, config.integrator);
}

ObservationScaler default_scaler(const EnvelopeLimits& limits, double trim_dynamic_pressure) {
    if (!(trim_dynamic_pressure > 0.0)) throw ConfigError("trim dynamic pressure must be positive");
    ObservationScaler s;
    const double q_span_rad = deg2rad(limits.q_max - limits.q_min);
    s.center = {0.5 * (limits.nz_max + limits.nz_min),
                deg2rad(0.5 * (limits.alpha_max + limits.alpha_min)),
                0.0,
                0.0,
                deg2rad(0.5 * (limits.q_max + limits.q_min)),
                0.0,
                trim_dynamic_pressure};
    s.half_range = {0.5 * (limits.nz_max - limits.nz_min),
                    deg2rad(0.5 * (limits.alpha_max - limits.alpha_min)),
                    std::numbers::pi,
                    1.0,
                    0.5 * q_span_rad,
                    q_span_rad,
                    trim_dynamic_pressure};
    return s;
}

}  // namespace rlfep
