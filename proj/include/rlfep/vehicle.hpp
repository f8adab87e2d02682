#pragma once

#include "rlfep/aero.hpp"
#include "rlfep/airframe.hpp"

#include <memory>

namespace rlfep {

/// Air data and load factor derived from a state and the current controls.
struct FlightCondition {
    double airspeed = 0.0;          // m/s
    double alpha = 0.0;             // rad
    double beta = 0.0;              // rad
    double mach = 0.0;
    double dynamic_pressure = 0.0;  // Pa
    double load_factor = 0.0;       // n_z [g], positive = pilot pushed into the seat
    bool aero_clamped = false;
};

/// Aircraft model: shared immutable aero data plus mass, thrust and actuator
/// configuration. Thread-safe for concurrent const use.
class Vehicle {
public:
    Vehicle(std::shared_ptr<const AeroModel> aero, MassProperties mass, ThrustModel thrust = {},
            std::array<ActuatorLimits, 3> actuator_limits = default_actuator_limits(),
            IntegratorOptions integrator = {});

    const AeroModel& aero() const { return *aero_; }
    std::shared_ptr<const AeroModel> aero_ptr() const { return aero_; }
    const MassProperties& mass() const { return mass_; }
    const ThrustModel& thrust() const { return thrust_; }
    const std::array<ActuatorLimits, 3>& actuator_limits() const { return actuator_limits_; }
    const IntegratorOptions& integrator() const { return integrator_; }

    AeroInput aero_input(const AircraftState& state, const Vec3& deflections_deg) const;

    /// Aerodynamic + thrust wrench (no gravity).
    Wrench contact_wrench(const AircraftState& state, const Vec3& deflections_deg, double thrust_n,
                          bool* aero_clamped = nullptr) const;

    /// Contact wrench plus gravity.
    Wrench total_wrench(const AircraftState& state, const Vec3& deflections_deg, double thrust_n,
                        bool* aero_clamped = nullptr) const;

    FlightCondition condition(const AircraftState& state, const Vec3& deflections_deg, double thrust_n) const;

    /// True angular acceleration at the state (the "perfect sensor").
    Vec3 omega_dot(const AircraftState& state, const Vec3& deflections_deg, double thrust_n) const;

    /// One RK4 physics step with deflections and thrust held.
    AircraftState advance(const AircraftState& state, const Vec3& deflections_deg, double thrust_n,
                          double dt) const;

private:
    std::shared_ptr<const AeroModel> aero_;
    MassProperties mass_;
    ThrustModel thrust_;
    std::array<ActuatorLimits, 3> actuator_limits_;
    IntegratorOptions integrator_;
};

struct TrimResult {
    AircraftState state;
    Vec3 deflections_deg = Vec3::Zero();
    double thrust_setting = 0.0;
    double thrust_n = 0.0;
    double alpha_deg = 0.0;
    Vec3 residuals = Vec3::Zero();  // (du/dt / g, dw/dt / g, dq/dt) at the solution
    int iterations = 0;
};

struct TrimOptions {
    int max_iterations = 50;
    double tolerance = 1e-10;
};

/// Wings-level, constant-altitude trim by damped Newton on (alpha, tail
/// deflection, thrust). Throws TrimError outside the model envelope or when
/// the iteration does not converge.
TrimResult trim_level_flight(const Vehicle& vehicle, double mach, double altitude_m,
                             const TrimOptions& options = {});

}  // namespace rlfep
