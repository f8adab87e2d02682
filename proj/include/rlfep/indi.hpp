#pragma once

#include "rlfep/vehicle.hpp"

namespace rlfep {

struct RateGains {
    double roll = 4.0;   // K_p [1/s]
    double pitch = 4.0;  // K_q
    double yaw = 4.0;    // K_r

    Vec3 as_vector() const { return {roll, pitch, yaw}; }
    void validate() const;
};

/// Moment-coefficient sensitivity to each surface (phi, per rad, columns in
/// Surface order) and the assembled input matrix g(x) mapping deflection
/// increments [rad] to angular acceleration [rad/s^2].
struct ControlEffectivity {
    Mat3 phi = Mat3::Zero();
    Mat3 g = Mat3::Zero();
};

/// g = J^-1 qbar S diag(b, c, b) phi
ControlEffectivity assemble_effectivity(const Mat3& phi, double dynamic_pressure, const Geometry& geometry,
                                        const Mat3& inertia);

/// Effectivity with phi from central differences of (Cl, Cm, Cn) about the
/// current deflections. Throws ControllerError if g is rank deficient.
ControlEffectivity effectivity(const AeroModel& aero, const AeroInput& condition, double dynamic_pressure,
                               const Mat3& inertia, double fd_step_deg = 0.5);

/// K (cmd - rate), componentwise.
Vec3 virtual_input(const Vec3& rate_cmd, const Vec3& rate, const RateGains& gains);

/// delta = g^-1 (omega_dot_c - omega_dot_0) + delta_0. Deflections in deg.
/// Throws ControllerError carrying the condition number when g is
/// ill-conditioned.
Vec3 indi_law(const Vec3& virtual_accel, const Vec3& omega_dot_measured, const Mat3& g,
              const Vec3& deflections_now_deg, double max_condition = 1e8);

/// Backward difference of sampled body rates through a first-order low-pass.
class OmegaDotEstimator {
public:
    explicit OmegaDotEstimator(double cutoff_rad_s = 50.0);

    Vec3 update(const Vec3& rate, double dt);
    void reset();
    Vec3 value() const { return filtered_; }

private:
    double cutoff_;
    bool primed_ = false;
    Vec3 last_rate_ = Vec3::Zero();
    Vec3 filtered_ = Vec3::Zero();
};

struct RateControllerConfig {
    RateGains gains;
    double estimator_cutoff = 50.0;  // rad/s
    double effectivity_step_deg = 0.5;
    double max_condition = 1e8;
    /// Test-only: read omega_dot from the model instead of estimating it.
    bool perfect_sensor = false;
};

/// INDI angular-rate loop. Holds the omega_dot filter; one instance per episode.
class RateController {
public:
    explicit RateController(RateControllerConfig config = {});

    /// Deflection commands [deg] for the given body-rate command [rad/s].
    Vec3 update(const Vehicle& vehicle, const AircraftState& state, const Vec3& deflections_deg,
                double thrust_n, const Vec3& rate_cmd, double dt);

    void reset() { estimator_.reset(); }
    const RateControllerConfig& config() const { return config_; }
    const ControlEffectivity& last_effectivity() const { return last_effectivity_; }

private:
    RateControllerConfig config_;
    OmegaDotEstimator estimator_;
    ControlEffectivity last_effectivity_;
};

}  // namespace rlfep
