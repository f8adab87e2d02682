#include "rlfep/indi.hpp"

#include <Eigen/SVD>

#include <sstream>

namespace rlfep {

namespace {

double condition_number(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m);
    const auto& s = svd.singularValues();
    if (s(2) <= 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / s(2);
}

}  // namespace

void RateGains::validate() const {
    if (!(roll > 0.0) || !(pitch > 0.0) || !(yaw > 0.0)) {
        throw ConfigError("rate gains must be positive");
    }
}

ControlEffectivity assemble_effectivity(const Mat3& phi, double dynamic_pressure, const Geometry& geometry,
                                        const Mat3& inertia) {
    if (!(dynamic_pressure > 0.0)) throw ControllerError("effectivity needs positive dynamic pressure", 0.0);
    const Vec3 arms(geometry.span, geometry.chord, geometry.span);
    ControlEffectivity out;
    out.phi = phi;
    out.g = inertia.inverse() * (dynamic_pressure * geometry.wing_area * arms.asDiagonal() * phi);
    return out;
}

ControlEffectivity effectivity(const AeroModel& aero, const AeroInput& condition, double dynamic_pressure,
                               const Mat3& inertia, double fd_step_deg) {
    Mat3 phi;
    for (int j = 0; j < 3; ++j) {
        AeroInput plus = condition, minus = condition;
        plus.deflections_deg(j) += fd_step_deg;
        minus.deflections_deg(j) -= fd_step_deg;
        const Vec3 mp = aero.coefficients(plus).coefficients.moment();
        const Vec3 mm = aero.coefficients(minus).coefficients.moment();
        phi.col(j) = (mp - mm) / (2.0 * deg2rad(fd_step_deg));
    }
    auto out = assemble_effectivity(phi, dynamic_pressure, aero.geometry(), inertia);
    Eigen::FullPivLU<Mat3> lu(out.g);
    if (!out.g.allFinite() || lu.rank() < 3) {
        throw ControllerError("control effectivity is rank deficient", condition_number(out.g));
    }
    return out;
}

Vec3 virtual_input(const Vec3& rate_cmd, const Vec3& rate, const RateGains& gains) {
    return gains.as_vector().cwiseProduct(rate_cmd - rate);
}

Vec3 indi_law(const Vec3& virtual_accel, const Vec3& omega_dot_measured, const Mat3& g,
              const Vec3& deflections_now_deg, double max_condition) {
    const double cond = condition_number(g);
    if (!(cond <= max_condition)) {
        std::ostringstream os;
        os << "control effectivity ill-conditioned (condition number " << cond << ")";
        throw ControllerError(os.str(), cond);
    }
    const Vec3 increment = g.partialPivLu().solve(virtual_accel - omega_dot_measured);
    return deflections_now_deg + increment * kRadToDeg;
}

OmegaDotEstimator::OmegaDotEstimator(double cutoff_rad_s) : cutoff_(cutoff_rad_s) {
    if (!(cutoff_ > 0.0)) throw ConfigError("estimator cutoff must be positive");
}

Vec3 OmegaDotEstimator::update(const Vec3& rate, double dt) {
    if (!primed_) {
        primed_ = true;
        last_rate_ = rate;
        filtered_.setZero();
        return filtered_;
    }
    const Vec3 raw = (rate - last_rate_) / dt;
    last_rate_ = rate;
    const double a = -std::expm1(-cutoff_ * dt);
    filtered_ += a * (raw - filtered_);
    return filtered_;
}

void OmegaDotEstimator::reset() {
    primed_ = false;
    last_rate_.setZero();
    filtered_.setZero();
}

RateController::RateController(RateControllerConfig config)
    : config_(config), estimator_(config.estimator_cutoff) {
    config_.gains.validate();
}

Vec3 RateController::update(const Vehicle& vehicle, const AircraftState& state, const Vec3& deflections_deg,
                            double thrust_n, const Vec3& rate_cmd, double dt) {
    Vec3 omega_dot = estimator_.update(state.omega, dt);
    if (config_.perfect_sensor) omega_dot = vehicle.omega_dot(state, deflections_deg, thrust_n);
    const double qbar = isa_atmosphere(state.altitude()).dynamic_pressure(state.airspeed());
    last_effectivity_ = effectivity(vehicle.aero(), vehicle.aero_input(state, deflections_deg), qbar,
                                    vehicle.mass().inertia, config_.effectivity_step_deg);
    const Vec3 nu = virtual_input(rate_cmd, state.omega, config_.gains);
    return indi_law(nu, omega_dot, last_effectivity_.g, deflections_deg, config_.max_condition);
}

}  // namespace rlfep
