#pragma once

#include "rlfep/vehicle.hpp"

namespace rlfep {

/// Protected-variable limits. Angles in deg, rates in deg/s, load factor in g.
/// Negative-side limits mirror the positive ones.
struct EnvelopeLimits {
    double alpha_max = 25.0;
    double alpha_min = -10.0;
    double nz_max = 9.0;
    double nz_min = -3.0;
    double q_max = 30.0;
    double q_min = -10.0;
    double fade_start_fraction = 0.9;
    double restore_gain = 2.0;  // (deg/s) per deg beyond the limit
    double qbar_floor = 100.0;  // Pa

    void validate() const;
};

struct NzEquivalentAlpha {
    double deg = 0.0;
    bool floored = false;  // dynamic pressure below the floor; static limit returned
};

/// W n_z / (qbar S |Cz_alpha|) in degrees. Below `qbar_floor` the fallback
/// (the static alpha limit) is returned and flagged.
NzEquivalentAlpha nz_equivalent_alpha(double weight, double nz_limit, double dynamic_pressure,
                                      double wing_area, double cz_alpha_per_rad, double fallback_deg,
                                      double qbar_floor = 100.0);

/// min(alpha_max, alpha_nz)
double effective_alpha_limit(double alpha_max_deg, double alpha_nz_deg);

/// Upper and lower effective angle-of-attack bounds [deg].
struct AlphaBounds {
    double upper = 25.0;
    double lower = -10.0;
};

/// Faded pilot command plus restorative feedback, clamped to [q_min, q_max].
/// Nose-up commands fade out approaching the upper bound, nose-down commands
/// approaching the lower bound. All in deg and deg/s.
double protect_pitch_command(double q_pilot, double alpha_deg, const AlphaBounds& bounds,
                             const EnvelopeLimits& limits);

/// Evaluates both alpha bounds for the current flight condition.
struct ProtectionBounds {
    AlphaBounds bounds;
    double cz_alpha = 0.0;
    bool floored = false;
    bool one_sided_derivative = false;
};

ProtectionBounds classical_bounds(const Vehicle& vehicle, const AircraftState& state, const Vec3& deflections_deg,
                                  const EnvelopeLimits& limits, double cz_alpha_step_deg = 0.5);

}  // namespace rlfep
