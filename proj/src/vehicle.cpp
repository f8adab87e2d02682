#include "rlfep/vehicle.hpp"

#include <sstream>

namespace rlfep {

Vehicle::Vehicle(std::shared_ptr<const AeroModel> aero, MassProperties mass, ThrustModel thrust,
                 std::array<ActuatorLimits, 3> actuator_limits, IntegratorOptions integrator)
    : aero_(std::move(aero)),
      mass_(std::move(mass)),
      thrust_(thrust),
      actuator_limits_(actuator_limits),
      integrator_(integrator) {
    if (!aero_) throw ConfigError("vehicle needs an aero model");
    mass_.validate();
    if (!(thrust_.max_thrust >= 0.0)) throw ConfigError("max thrust must be non-negative");
    for (const auto& a : actuator_limits_) {
        if (!(a.time_constant > 0.0) || !(a.rate_limit > 0.0) || !(a.position_limit > 0.0)) {
            throw ConfigError("actuator constants must be positive");
        }
    }
}

AeroInput Vehicle::aero_input(const AircraftState& state, const Vec3& deflections_deg) const {
    AeroInput in;
    in.alpha = state.alpha();
    in.beta = state.beta();
    in.rates = state.omega;
    in.deflections_deg = deflections_deg;
    in.airspeed = state.airspeed();
    return in;
}

Wrench Vehicle::contact_wrench(const AircraftState& state, const Vec3& deflections_deg, double thrust_n,
                               bool* aero_clamped) const {
    const auto result = aero_->coefficients(aero_input(state, deflections_deg));
    if (aero_clamped) *aero_clamped = result.clamped;
    const double qbar = isa_atmosphere(state.altitude()).dynamic_pressure(state.airspeed());
    Wrench w = dimensionalize(result.coefficients, qbar, aero_->geometry());
    w.force.x() += thrust_n;
    return w;
}

Wrench Vehicle::total_wrench(const AircraftState& state, const Vec3& deflections_deg, double thrust_n,
                             bool* aero_clamped) const {
    Wrench w = contact_wrench(state, deflections_deg, thrust_n, aero_clamped);
    w.force += gravity_body(state.euler, mass_.mass);
    return w;
}

FlightCondition Vehicle::condition(const AircraftState& state, const Vec3& deflections_deg,
                                   double thrust_n) const {
    FlightCondition fc;
    const auto atm = isa_atmosphere(state.altitude());
    fc.airspeed = state.airspeed();
    fc.alpha = state.alpha();
    fc.beta = state.beta();
    fc.mach = fc.airspeed / atm.speed_of_sound;
    fc.dynamic_pressure = atm.dynamic_pressure(fc.airspeed);
    const Wrench w = contact_wrench(state, deflections_deg, thrust_n, &fc.aero_clamped);
    fc.load_factor = -w.force.z() / mass_.weight();
    return fc;
}

Vec3 Vehicle::omega_dot(const AircraftState& state, const Vec3& deflections_deg, double thrust_n) const {
    const Wrench w = contact_wrench(state, deflections_deg, thrust_n);
    return rotational_derivative(state.omega, w.moment, mass_.inertia);
}

AircraftState Vehicle::advance(const AircraftState& state, const Vec3& deflections_deg, double thrust_n,
                               double dt) const {
    return step(
        state,
        WrenchFunction([&](const AircraftState& s) { return total_wrench(s, deflections_deg, thrust_n); }),
        mass_, dt, integrator_);
}

namespace {

AircraftState level_state(double airspeed, double alpha, double altitude) {
    AircraftState s;
    s.velocity_body = Vec3(airspeed * std::cos(alpha), 0.0, airspeed * std::sin(alpha));
    s.euler = Vec3(0.0, alpha, 0.0);  // flight path angle zero
    s.position_ned = Vec3(0.0, 0.0, -altitude);
    return s;
}

}  // namespace

TrimResult trim_level_flight(const Vehicle& vehicle, double mach, double altitude_m, const TrimOptions& options) {
    const auto& env = vehicle.aero().envelope();
    if (!(mach >= env.mach_min && mach <= env.mach_max)) {
        std::ostringstream os;
        os << "trim Mach " << mach << " outside model envelope [" << env.mach_min << ", " << env.mach_max << "]";
        throw TrimError(os.str());
    }
    if (!(altitude_m >= env.altitude_min && altitude_m <= env.altitude_max)) {
        std::ostringstream os;
        os << "trim altitude " << altitude_m << " m outside model envelope";
        throw TrimError(os.str());
    }
    const double airspeed = mach * isa_atmosphere(altitude_m).speed_of_sound;
    const double weight = vehicle.mass().weight();
    const double max_thrust = std::max(vehicle.thrust().max_thrust, 1.0);

    // Unknowns: alpha [rad], tail deflection [rad], thrust / weight.
    auto residual = [&](const Vec3& x) {
        const AircraftState s = level_state(airspeed, x(0), altitude_m);
        const Vec3 defl(0.0, rad2deg(x(1)), 0.0);
        const Wrench w = vehicle.total_wrench(s, defl, x(2) * weight);
        const Vec3 vdot = translational_derivative(s, w.force, vehicle.mass().mass);
        const Vec3 wdot = rotational_derivative(s.omega, w.moment, vehicle.mass().inertia);
        return Vec3(vdot.x() / kGravity, vdot.z() / kGravity, wdot.y());
    };

    Vec3 x(deg2rad(2.0), 0.0, 0.1);
    Vec3 r = residual(x);
    int iter = 0;
    for (; iter < options.max_iterations && r.cwiseAbs().maxCoeff() > options.tolerance; ++iter) {
        Mat3 jac;
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(x(j)));
            Vec3 xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            jac.col(j) = (residual(xp) - residual(xm)) / (2.0 * h);
        }
        Eigen::FullPivLU<Mat3> lu(jac);
        if (!lu.isInvertible()) throw TrimError("trim Jacobian is singular");
        const Vec3 dx = lu.solve(-r);
        double lambda = 1.0;
        Vec3 x_new = x + dx;
        Vec3 r_new = residual(x_new);
        while (r_new.norm() >= r.norm() && lambda > 1e-4) {
            lambda *= 0.5;
            x_new = x + lambda * dx;
            r_new = residual(x_new);
        }
        x = x_new;
        r = r_new;
    }
    if (!(r.cwiseAbs().maxCoeff() <= options.tolerance)) {
        std::ostringstream os;
        os << "trim did not converge after " << iter << " iterations; residuals (du/g, dw/g, dq) = (" << r(0)
           << ", " << r(1) << ", " << r(2) << ")";
        throw TrimError(os.str());
    }
    const double tail_deg = rad2deg(x(1));
    if (std::abs(tail_deg) > vehicle.actuator_limits()[1].position_limit) {
        throw TrimError("trim tail deflection exceeds its position limit");
    }
    const double thrust_n = x(2) * weight;
    if (thrust_n < 0.0 || thrust_n > max_thrust) {
        throw TrimError("trim thrust outside [0, max thrust]");
    }

    TrimResult out;
    out.state = level_state(airspeed, x(0), altitude_m);
    out.deflections_deg = Vec3(0.0, tail_deg, 0.0);
    out.thrust_n = thrust_n;
    out.thrust_setting = thrust_n / max_thrust;
    out.alpha_deg = rad2deg(x(0));
    out.residuals = r;
    out.iterations = iter;
    return out;
}

}  // namespace rlfep
