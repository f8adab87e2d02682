#pragma once

#include "rlfep/common.hpp"

#include <functional>

namespace rlfep {

/// Rigid-body state. Euler angles are (roll, pitch, yaw); position is NED.
/// Pitch is integrated unwrapped, so a looping trajectory carries theta past
/// +-pi/2; only the immediate neighbourhood of cos(theta) = 0 is rejected.
struct AircraftState {
    Vec3 velocity_body = Vec3::Zero();  // u, v, w [m/s]
    Vec3 omega = Vec3::Zero();          // p, q, r [rad/s]
    Vec3 euler = Vec3::Zero();          // phi, theta, psi [rad]
    Vec3 position_ned = Vec3::Zero();   // [m]

    double altitude() const { return -position_ned.z(); }
    double airspeed() const { return velocity_body.norm(); }
    double alpha() const { return std::atan2(velocity_body.z(), velocity_body.x()); }
    double beta() const;

    bool finite() const;
};

struct MassProperties {
    double mass = 9295.44;  // kg
    Mat3 inertia = Mat3::Identity();

    double weight() const { return mass * kGravity; }

    /// Throws ConfigError unless mass > 0 and the inertia tensor is
    /// symmetric, positive definite and satisfies the triangle inequalities.
    void validate() const;

    static MassProperties f16_nominal();
};

struct Atmosphere {
    double density = 0.0;         // kg/m^3
    double speed_of_sound = 0.0;  // m/s
    double temperature = 0.0;     // K
    double pressure = 0.0;        // Pa

    double dynamic_pressure(double airspeed) const { return 0.5 * density * airspeed * airspeed; }
};

/// ISA troposphere + isothermal lower stratosphere, valid to 20 km.
Atmosphere isa_atmosphere(double altitude_m);

struct Wrench {
    Vec3 force = Vec3::Zero();   // body axes [N]
    Vec3 moment = Vec3::Zero();  // body axes [N m]
};

/// m^-1 F - omega x V
Vec3 translational_derivative(const AircraftState& state, const Vec3& force_body, double mass);

/// J^-1 (M - omega x J omega)
Vec3 rotational_derivative(const Vec3& omega, const Vec3& moment, const Mat3& inertia);

/// Euler-angle rates from body rates. Throws SingularityError when
/// |cos(theta)| < margin.
Vec3 euler_kinematics(const Vec3& omega, const Vec3& euler, double margin = 1e-9);

/// Body-to-NED direction cosine matrix.
Mat3 body_to_ned(const Vec3& euler);

/// Gravity force expressed in body axes.
Vec3 gravity_body(const Vec3& euler, double mass);

struct StateDerivative {
    Vec3 velocity_body;
    Vec3 omega;
    Vec3 euler;
    Vec3 position_ned;
};

using WrenchFunction = std::function<Wrench(const AircraftState&)>;

struct IntegratorOptions {
    double max_dt = 0.005;
    double singularity_margin = 1e-9;
};

StateDerivative state_derivative(const AircraftState& state, const Wrench& wrench,
                                 const MassProperties& mass, double singularity_margin = 1e-9);

/// One classical RK4 step. The wrench function is re-evaluated at every
/// stage; it must include gravity if gravity is wanted.
AircraftState step(const AircraftState& state, const WrenchFunction& wrench,
                   const MassProperties& mass, double dt, const IntegratorOptions& options = {});

/// Convenience overload holding the wrench constant over the step.
AircraftState step(const AircraftState& state, const Wrench& wrench, const MassProperties& mass,
                   double dt, const IntegratorOptions& options = {});

}  // namespace rlfep
