#include "rlfep/airframe.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <sstream>

namespace rlfep {

namespace {

void require_finite(const Vec3& v, const char* name) {
    if (!v.allFinite()) {
        throw IntegrityError(std::string("non-finite ") + name);
    }
}

AircraftState advance(const AircraftState& s, const StateDerivative& d, double h) {
    AircraftState out;
    out.velocity_body = s.velocity_body + h * d.velocity_body;
    out.omega = s.omega + h * d.omega;
    out.euler = s.euler + h * d.euler;
    out.position_ned = s.position_ned + h * d.position_ned;
    return out;
}

}  // namespace

double AircraftState::beta() const {
    const double v = airspeed();
    if (v <= 0.0) return 0.0;
    return std::asin(std::clamp(velocity_body.y() / v, -1.0, 1.0));
}

bool AircraftState::finite() const {
    return velocity_body.allFinite() && omega.allFinite() && euler.allFinite() &&
           position_ned.allFinite();
}

void MassProperties::validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw ConfigError("mass must be positive and finite");
    }
    if (!inertia.allFinite()) {
        throw ConfigError("inertia tensor has non-finite entries");
    }
    if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-9 * inertia.cwiseAbs().maxCoeff()) {
        throw ConfigError("inertia tensor is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> solver(inertia);
    const Vec3 ev = solver.eigenvalues();
    if (ev.minCoeff() <= 0.0) {
        throw ConfigError("inertia tensor is not positive definite");
    }
    // Principal moments of a physical body satisfy the triangle inequality.
    const double tol = 1e-9 * ev.sum();
    if (ev(0) + ev(1) < ev(2) - tol || ev(0) + ev(2) < ev(1) - tol || ev(1) + ev(2) < ev(0) - tol) {
        throw ConfigError("principal moments violate the triangle inequality");
    }
}

MassProperties MassProperties::f16_nominal() {
    MassProperties mp;
    mp.mass = 9295.44;
    const double ixx = 12874.8, iyy = 75673.6, izz = 85552.1, ixz = 1331.4;
    mp.inertia << ixx, 0.0, -ixz,  //
        0.0, iyy, 0.0,             //
        -ixz, 0.0, izz;
    return mp;
}

Atmosphere isa_atmosphere(double altitude_m) {
    constexpr double T0 = 288.15, P0 = 101325.0, L = 0.0065, R = 287.05287, gamma = 1.4;
    constexpr double h_tropo = 11000.0;
    const double h = std::clamp(altitude_m, -2000.0, 20000.0);
    Atmosphere atm;
    if (h <= h_tropo) {
        atm.temperature = T0 - L * h;
        atm.pressure = P0 * std::pow(atm.temperature / T0, kGravity / (L * R));
    } else {
        const double T11 = T0 - L * h_tropo;
        const double P11 = P0 * std::pow(T11 / T0, kGravity / (L * R));
        atm.temperature = T11;
        atm.pressure = P11 * std::exp(-kGravity * (h - h_tropo) / (R * T11));
    }
    atm.density = atm.pressure / (R * atm.temperature);
    atm.speed_of_sound = std::sqrt(gamma * R * atm.temperature);
    return atm;
}

Vec3 translational_derivative(const AircraftState& state, const Vec3& force_body, double mass) {
    if (!(mass > 0.0)) throw ConfigError("mass must be positive");
    require_finite(force_body, "force");
    require_finite(state.velocity_body, "body velocity");
    require_finite(state.omega, "angular rate");
    return force_body / mass - state.omega.cross(state.velocity_body);
}

Vec3 rotational_derivative(const Vec3& omega, const Vec3& moment, const Mat3& inertia) {
    require_finite(omega, "angular rate");
    require_finite(moment, "moment");
    Eigen::FullPivLU<Mat3> lu(inertia);
    if (!lu.isInvertible()) throw ConfigError("inertia tensor is singular");
    return lu.solve(moment - omega.cross(inertia * omega));
}

Vec3 euler_kinematics(const Vec3& omega, const Vec3& euler, double margin) {
    const double sphi = std::sin(euler(0)), cphi = std::cos(euler(0));
    const double ctheta = std::cos(euler(1)), ttheta = std::tan(euler(1));
    if (std::abs(ctheta) < margin) {
        std::ostringstream os;
        os << "Euler kinematics singular at theta = " << rad2deg(euler(1)) << " deg";
        throw SingularityError(os.str());
    }
    Mat3 e;
    e << 1.0, sphi * ttheta, cphi * ttheta,  //
        0.0, cphi, -sphi,                    //
        0.0, sphi / ctheta, cphi / ctheta;
    return e * omega;
}

Mat3 body_to_ned(const Vec3& euler) {
    const double sphi = std::sin(euler(0)), cphi = std::cos(euler(0));
    const double sth = std::sin(euler(1)), cth = std::cos(euler(1));
    const double spsi = std::sin(euler(2)), cpsi = std::cos(euler(2));
    Mat3 c;
    c << cth * cpsi, sphi * sth * cpsi - cphi * spsi, cphi * sth * cpsi + sphi * spsi,  //
        cth * spsi, sphi * sth * spsi + cphi * cpsi, cphi * sth * spsi - sphi * cpsi,    //
        -sth, sphi * cth, cphi * cth;
    return c;
}

Vec3 gravity_body(const Vec3& euler, double mass) {
    const double w = mass * kGravity;
    const double sphi = std::sin(euler(0)), cphi = std::cos(euler(0));
    const double sth = std::sin(euler(1)), cth = std::cos(euler(1));
    return Vec3(-w * sth, w * sphi * cth, w * cphi * cth);
}

StateDerivative state_derivative(const AircraftState& state, const Wrench& wrench,
                                 const MassProperties& mass, double singularity_margin) {
    StateDerivative d;
    d.velocity_body = translational_derivative(state, wrench.force, mass.mass);
    d.omega = rotational_derivative(state.omega, wrench.moment, mass.inertia);
    d.euler = euler_kinematics(state.omega, state.euler, singularity_margin);
    d.position_ned = body_to_ned(state.euler) * state.velocity_body;
    return d;
}

AircraftState step(const AircraftState& state, const WrenchFunction& wrench,
                   const MassProperties& mass, double dt, const IntegratorOptions& options) {
    if (!(dt > 0.0) || dt > options.max_dt) {
        throw ConfigError("integration step must lie in (0, " + std::to_string(options.max_dt) + "]");
    }
    const double margin = options.singularity_margin;
    const auto k1 = state_derivative(state, wrench(state), mass, margin);
    const auto s2 = advance(state, k1, 0.5 * dt);
    const auto k2 = state_derivative(s2, wrench(s2), mass, margin);
    const auto s3 = advance(state, k2, 0.5 * dt);
    const auto k3 = state_derivative(s3, wrench(s3), mass, margin);
    const auto s4 = advance(state, k3, dt);
    const auto k4 = state_derivative(s4, wrench(s4), mass, margin);

    StateDerivative avg;
    avg.velocity_body = (k1.velocity_body + 2.0 * k2.velocity_body + 2.0 * k3.velocity_body + k4.velocity_body) / 6.0;
    avg.omega = (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega) / 6.0;
    avg.euler = (k1.euler + 2.0 * k2.euler + 2.0 * k3.euler + k4.euler) / 6.0;
    avg.position_ned = (k1.position_ned + 2.0 * k2.position_ned + 2.0 * k3.position_ned + k4.position_ned) / 6.0;
    AircraftState next = advance(state, avg, dt);

    if (!next.velocity_body.allFinite()) throw IntegrityError("non-finite body velocity after step");
    if (!next.omega.allFinite()) throw IntegrityError("non-finite angular rate after step");
    if (!next.euler.allFinite()) throw IntegrityError("non-finite Euler angles after step");
    if (!next.position_ned.allFinite()) throw IntegrityError("non-finite position after step");
    return next;
}

AircraftState step(const AircraftState& state, const Wrench& wrench, const MassProperties& mass,
                   double dt, const IntegratorOptions& options) {
    return step(state, WrenchFunction([&wrench](const AircraftState&) { return wrench; }), mass, dt,
                options);
}

}  // namespace rlfep
