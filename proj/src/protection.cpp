#include "rlfep/protection.hpp"

#include <algorithm>

namespace rlfep {

void EnvelopeLimits::validate() const {
    if (!(alpha_max > 0.0)) throw ConfigError("alpha_max must be positive");
    if (!(alpha_min < 0.0)) throw ConfigError("alpha_min must be negative");
    if (!(nz_max > 1.0)) throw ConfigError("nz_max must exceed 1 g");
    if (!(nz_min < 0.0)) throw ConfigError("nz_min must be negative");
    if (!(q_max > 0.0) || !(q_min < 0.0)) throw ConfigError("pitch-rate limits must satisfy q_max > 0 > q_min");
    if (!(fade_start_fraction >= 0.0 && fade_start_fraction < 1.0)) {
        throw ConfigError("fade_start_fraction must lie in [0, 1)");
    }
    if (!(restore_gain >= 0.0)) throw ConfigError("restore_gain must be non-negative");
}

NzEquivalentAlpha nz_equivalent_alpha(double weight, double nz_limit, double dynamic_pressure,
                                      double wing_area, double cz_alpha_per_rad, double fallback_deg,
                                      double qbar_floor) {
    if (dynamic_pressure < qbar_floor) return {fallback_deg, true};
    if (cz_alpha_per_rad == 0.0) throw ConfigError("Cz_alpha is zero");
    const double rad = weight * nz_limit / (dynamic_pressure * wing_area * std::abs(cz_alpha_per_rad));
    return {rad2deg(rad), false};
}

double effective_alpha_limit(double alpha_max_deg, double alpha_nz_deg) {
    return std::min(alpha_max_deg, alpha_nz_deg);
}

double protect_pitch_command(double q_pilot, double alpha_deg, const AlphaBounds& bounds,
                             const EnvelopeLimits& limits) {
    const double band = 1.0 - limits.fade_start_fraction;
    double q = q_pilot;
    if (q_pilot > 0.0) {
        const double k = band > 0.0 ? std::clamp((bounds.upper - alpha_deg) / (band * bounds.upper), 0.0, 1.0)
                                    : (alpha_deg < bounds.upper ? 1.0 : 0.0);
        q = k * q_pilot;
    } else if (q_pilot < 0.0) {
        const double span = std::abs(bounds.lower);
        const double k = band > 0.0 ? std::clamp((alpha_deg - bounds.lower) / (band * span), 0.0, 1.0)
                                    : (alpha_deg > bounds.lower ? 1.0 : 0.0);
        q = k * q_pilot;
    }
    if (alpha_deg > bounds.upper) q -= limits.restore_gain * (alpha_deg - bounds.upper);
    if (alpha_deg < bounds.lower) q -= limits.restore_gain * (alpha_deg - bounds.lower);
    return std::clamp(q, limits.q_min, limits.q_max);
}

ProtectionBounds classical_bounds(const Vehicle& vehicle, const AircraftState& state, const Vec3& deflections_deg,
                                  const EnvelopeLimits& limits, double cz_alpha_step_deg) {
    ProtectionBounds out;
    const double qbar = isa_atmosphere(state.altitude()).dynamic_pressure(state.airspeed());
    const auto slope = cz_alpha(vehicle.aero(), vehicle.aero_input(state, deflections_deg), cz_alpha_step_deg);
    out.cz_alpha = slope.per_rad;
    out.one_sided_derivative = slope.one_sided;
    const double area = vehicle.aero().geometry().wing_area;
    const double w = vehicle.mass().weight();
    const auto up = nz_equivalent_alpha(w, limits.nz_max, qbar, area, slope.per_rad, limits.alpha_max, limits.qbar_floor);
    const auto lo = nz_equivalent_alpha(w, limits.nz_min, qbar, area, slope.per_rad, limits.alpha_min, limits.qbar_floor);
    out.bounds.upper = effective_alpha_limit(limits.alpha_max, up.deg);
    out.bounds.lower = std::max(limits.alpha_min, lo.deg);
    out.floored = up.floored || lo.floored;
    return out;
}

}  // namespace rlfep
