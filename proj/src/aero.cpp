#include "rlfep/aero.hpp"

#include <algorithm>

namespace rlfep {

namespace {

constexpr std::array<const char*, 6> kCoefficientNames{"cx", "cy", "cz", "cl", "cm", "cn"};

enum AxisId : int { kAlpha, kBeta, kAileron, kTail, kRudder, kPHat, kQHat, kRHat };

int axis_id(const std::string& name) {
    static const std::map<std::string, int> ids{
        {"alpha_deg", kAlpha}, {"beta_deg", kBeta}, {"aileron_deg", kAileron}, {"tail_deg", kTail},
        {"rudder_deg", kRudder}, {"p_hat", kPHat}, {"q_hat", kQHat},         {"r_hat", kRHat}};
    auto it = ids.find(name);
    if (it == ids.end()) throw ConfigError("unknown aero table axis '" + name + "'");
    return it->second;
}

struct Clamped {
    double alpha;
    double beta;
    bool clamped;
};

Clamped clamp_to_envelope(const AeroInput& in, const AeroEnvelope& env) {
    const double a = std::clamp(in.alpha, deg2rad(env.alpha_min_deg), deg2rad(env.alpha_max_deg));
    const double b = std::clamp(in.beta, deg2rad(env.beta_min_deg), deg2rad(env.beta_max_deg));
    return {a, b, a != in.alpha || b != in.beta};
}

}  // namespace

void Geometry::validate() const {
    if (!(wing_area > 0.0) || !(span > 0.0) || !(chord > 0.0)) {
        throw ConfigError("aircraft geometry must be positive");
    }
}

AeroModel::AeroModel(Geometry geometry, AeroEnvelope envelope)
    : geometry_(geometry), envelope_(envelope) {
    geometry_.validate();
    if (!(envelope_.alpha_max_deg > envelope_.alpha_min_deg) ||
        !(envelope_.beta_max_deg > envelope_.beta_min_deg) || !(envelope_.mach_max > envelope_.mach_min)) {
        throw ConfigError("aero envelope bounds are inverted");
    }
}

SurrogateAeroModel::SurrogateAeroModel(SurrogateParams params, Geometry geometry, AeroEnvelope envelope)
    : AeroModel(geometry, envelope), params_(params) {}

AeroResult SurrogateAeroModel::coefficients(const AeroInput& input) const {
    const auto& k = params_;
    const auto [alpha, beta, clamped] = clamp_to_envelope(input, envelope());
    const double v = std::max(input.airspeed, 1.0);
    const double p_hat = input.rates(0) * geometry().span / (2.0 * v);
    const double q_hat = input.rates(1) * geometry().chord / (2.0 * v);
    const double r_hat = input.rates(2) * geometry().span / (2.0 * v);
    const double da = deg2rad(input.deflections_deg(0));
    const double dh = deg2rad(input.deflections_deg(1));
    const double dr = deg2rad(input.deflections_deg(2));

    const double lift = k.lift_0 + k.lift_alpha * alpha - k.lift_alpha3 * alpha * alpha * alpha + k.lift_tail * dh;
    const double drag = k.drag_0 + k.drag_k * lift * lift;
    const double ca = std::cos(alpha), sa = std::sin(alpha);

    AeroResult out;
    out.clamped = clamped;
    auto& c = out.coefficients;
    c.cx = lift * sa - drag * ca;
    c.cz = -lift * ca - drag * sa;
    c.cm = k.pitch_0 + k.pitch_alpha * alpha + k.pitch_tail * dh + k.pitch_q * q_hat;
    c.cy = k.side_beta * beta + k.side_rudder * dr;
    c.cl = k.roll_beta * beta + k.roll_p * p_hat + k.roll_r * r_hat + k.roll_aileron * da + k.roll_rudder * dr;
    c.cn = k.yaw_beta * beta + k.yaw_p * p_hat + k.yaw_r * r_hat + k.yaw_aileron * da + k.yaw_rudder * dr;
    return out;
}

TableAeroModel::TableAeroModel(std::map<std::string, GridTable> tables, std::string origin,
                               Geometry geometry, AeroEnvelope envelope)
    : AeroModel(geometry, envelope), origin_(std::move(origin)) {
    for (std::size_t i = 0; i < kCoefficientNames.size(); ++i) {
        auto it = tables.find(kCoefficientNames[i]);
        if (it == tables.end()) {
            throw ConfigError(std::string("aero table set is missing ") + kCoefficientNames[i]);
        }
        tables_[i] = std::move(it->second);
        for (const auto& axis : tables_[i].axes()) axis_map_[i].push_back(axis_id(axis.name));
    }
}

std::unique_ptr<TableAeroModel> TableAeroModel::load(const std::filesystem::path& directory,
                                                     Geometry geometry, AeroEnvelope envelope) {
    std::map<std::string, GridTable> tables;
    for (const char* name : kCoefficientNames) {
        tables.emplace(name, load_table_csv(directory / (std::string(name) + ".csv")));
    }
    return std::make_unique<TableAeroModel>(std::move(tables), directory.string(), geometry, envelope);
}

AeroResult TableAeroModel::coefficients(const AeroInput& input) const {
    const double v = std::max(input.airspeed, 1.0);
    const std::array<double, 8> coords{
        rad2deg(input.alpha),
        rad2deg(input.beta),
        input.deflections_deg(0),
        input.deflections_deg(1),
        input.deflections_deg(2),
        input.rates(0) * geometry().span / (2.0 * v),
        input.rates(1) * geometry().chord / (2.0 * v),
        input.rates(2) * geometry().span / (2.0 * v),
    };
    AeroResult out;
    std::array<double, 6> values{};
    std::array<double, 8> point{};
    for (std::size_t i = 0; i < tables_.size(); ++i) {
        const auto& map = axis_map_[i];
        for (std::size_t d = 0; d < map.size(); ++d) point[d] = coords[static_cast<std::size_t>(map[d])];
        const auto lookup = tables_[i].interpolate(std::span<const double>(point.data(), map.size()));
        values[i] = lookup.value;
        out.clamped = out.clamped || lookup.clamped;
    }
    auto& c = out.coefficients;
    c.cx = values[0];
    c.cy = values[1];
    c.cz = values[2];
    c.cl = values[3];
    c.cm = values[4];
    c.cn = values[5];
    return out;
}

Wrench dimensionalize(const Coefficients& c, double dynamic_pressure, const Geometry& geometry) {
    const double qs = dynamic_pressure * geometry.wing_area;
    Wrench w;
    w.force = qs * c.force();
    w.moment = Vec3(qs * geometry.span * c.cl, qs * geometry.chord * c.cm, qs * geometry.span * c.cn);
    if (!w.force.allFinite() || !w.moment.allFinite()) {
        throw IntegrityError("non-finite aerodynamic wrench");
    }
    return w;
}

CzAlpha cz_alpha(const AeroModel& model, const AeroInput& condition, double step_deg) {
    if (!(step_deg > 0.0)) throw ConfigError("cz_alpha step must be positive");
    const double h = deg2rad(step_deg);
    const double lo = deg2rad(model.envelope().alpha_min_deg);
    const double hi = deg2rad(model.envelope().alpha_max_deg);
    auto cz_at = [&](double alpha) {
        AeroInput in = condition;
        in.alpha = alpha;
        return model.coefficients(in).coefficients.cz;
    };
    const double a = std::clamp(condition.alpha, lo, hi);
    CzAlpha out;
    if (a + h > hi) {
        out.per_rad = (cz_at(a) - cz_at(a - h)) / h;
        out.one_sided = true;
    } else if (a - h < lo) {
        out.per_rad = (cz_at(a + h) - cz_at(a)) / h;
        out.one_sided = true;
    } else {
        out.per_rad = (cz_at(a + h) - cz_at(a - h)) / (2.0 * h);
    }
    return out;
}

ActuatorState actuator_step(const ActuatorState& state, const ActuatorLimits& limits, double command,
                            double dt) {
    if (!(dt > 0.0)) throw ConfigError("actuator step must be positive");
    // Exact first-order response over dt, expressed as an average rate.
    const double lag_rate = (command - state.position) * -std::expm1(-dt / limits.time_constant) / dt;
    const double rate = std::clamp(lag_rate, -limits.rate_limit, limits.rate_limit);
    ActuatorState next;
    next.command = command;
    next.position = std::clamp(state.position + rate * dt, -limits.position_limit, limits.position_limit);
    return next;
}

std::array<ActuatorLimits, 3> default_actuator_limits() {
    return {ActuatorLimits{0.0495, 80.0, 21.5}, ActuatorLimits{0.0495, 60.0, 25.0},
            ActuatorLimits{0.0495, 120.0, 30.0}};
}

Vec3 ActuatorBank::positions() const {
    return {states[0].position, states[1].position, states[2].position};
}

Vec3 ActuatorBank::commands() const {
    return {states[0].command, states[1].command, states[2].command};
}

void ActuatorBank::set_positions(const Vec3& deg) {
    for (int i = 0; i < 3; ++i) {
        const double p = std::clamp(deg(i), -limits[static_cast<std::size_t>(i)].position_limit,
                                    limits[static_cast<std::size_t>(i)].position_limit);
        states[static_cast<std::size_t>(i)] = {p, p};
    }
}

void ActuatorBank::step(const Vec3& command_deg, double dt) {
    for (std::size_t i = 0; i < 3; ++i) {
        states[i] = actuator_step(states[i], limits[i], command_deg(static_cast<int>(i)), dt);
    }
}

ThrustModel::Output ThrustModel::thrust_force(double setting) const {
    Output out;
    const double s = std::clamp(setting, 0.0, 1.0);
    out.clamped = s != setting;
    out.force = s * max_thrust;
    return out;
}

}  // namespace rlfep
