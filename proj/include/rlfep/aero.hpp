#pragma once

#include "rlfep/airframe.hpp"
#include "rlfep/table.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

namespace rlfep {

/// Control surface order used everywhere a 3-vector of deflections appears.
enum class Surface : int { aileron = 0, horizontal_tail = 1, rudder = 2 };

struct Geometry {
    double wing_area = 27.87;  // S [m^2]
    double span = 9.144;       // b [m]
    double chord = 3.45;       // mean aerodynamic chord [m]

    void validate() const;
};

struct AeroEnvelope {
    double alpha_min_deg = -20.0;
    double alpha_max_deg = 45.0;
    double beta_min_deg = -30.0;
    double beta_max_deg = 30.0;
    double mach_min = 0.1;
    double mach_max = 0.95;
    double altitude_min = 0.0;
    double altitude_max = 15000.0;
};

struct AeroInput {
    double alpha = 0.0;           // rad
    double beta = 0.0;            // rad
    Vec3 rates = Vec3::Zero();    // p, q, r [rad/s]
    Vec3 deflections_deg = Vec3::Zero();  // aileron, horizontal tail, rudder
    double airspeed = 0.0;        // m/s
};

/// Body-axis force (x, y, z) and moment (roll, pitch, yaw) coefficients.
struct Coefficients {
    double cx = 0.0, cy = 0.0, cz = 0.0;
    double cl = 0.0, cm = 0.0, cn = 0.0;

    Vec3 force() const { return {cx, cy, cz}; }
    Vec3 moment() const { return {cl, cm, cn}; }
};

struct AeroResult {
    Coefficients coefficients;
    bool clamped = false;  // query left the model envelope and was clamped
};

class AeroModel {
public:
    AeroModel(Geometry geometry, AeroEnvelope envelope);
    virtual ~AeroModel() = default;

    virtual AeroResult coefficients(const AeroInput& input) const = 0;
    /// "polynomial-surrogate" or "table-set:<directory>"; recorded in every log.
    virtual std::string source() const = 0;

    const Geometry& geometry() const { return geometry_; }
    const AeroEnvelope& envelope() const { return envelope_; }

private:
    Geometry geometry_;
    AeroEnvelope envelope_;
};

/// Smooth stand-in for wind-tunnel data. Longitudinal terms are written in
/// stability axes (lift/drag) and rotated into body axes; lateral terms are
/// linear in sideslip, rates and deflections. Per-rad derivatives, rates
/// non-dimensionalised with b/2V or c/2V.
struct SurrogateParams {
    double lift_0 = 0.05;
    double lift_alpha = 4.0;
    double lift_alpha3 = 1.6;  // cubic roll-off: CL -= lift_alpha3 * alpha^3
    double lift_tail = 0.35;
    double drag_0 = 0.022;
    double drag_k = 0.12;  // CD = drag_0 + drag_k CL^2
    double pitch_0 = 0.0;
    double pitch_alpha = -0.25;
    double pitch_tail = -0.65;
    double pitch_q = -5.0;
    double side_beta = -1.0;
    double side_rudder = 0.15;
    double roll_beta = -0.08;
    double roll_p = -0.35;
    double roll_r = 0.10;
    double roll_aileron = 0.08;
    double roll_rudder = 0.012;
    double yaw_beta = 0.12;
    double yaw_p = -0.03;
    double yaw_r = -0.30;
    double yaw_aileron = -0.006;
    double yaw_rudder = -0.07;
};

class SurrogateAeroModel final : public AeroModel {
public:
    explicit SurrogateAeroModel(SurrogateParams params = {}, Geometry geometry = {},
                                AeroEnvelope envelope = {});

    AeroResult coefficients(const AeroInput& input) const override;
    std::string source() const override { return "polynomial-surrogate"; }
    const SurrogateParams& params() const { return params_; }

private:
    SurrogateParams params_;
};

/// One grid table per coefficient (cx, cy, cz, cl, cm, cn). Each table may use
/// any subset of the axes alpha_deg, beta_deg, aileron_deg, tail_deg,
/// rudder_deg, p_hat, q_hat, r_hat.
class TableAeroModel final : public AeroModel {
public:
    TableAeroModel(std::map<std::string, GridTable> tables, std::string origin, Geometry geometry,
                   AeroEnvelope envelope);

    /// Loads cx.csv ... cn.csv from `directory`.
    static std::unique_ptr<TableAeroModel> load(const std::filesystem::path& directory,
                                                Geometry geometry, AeroEnvelope envelope);

    AeroResult coefficients(const AeroInput& input) const override;
    std::string source() const override { return "table-set:" + origin_; }

private:
    std::array<GridTable, 6> tables_;
    std::array<std::vector<int>, 6> axis_map_;
    std::string origin_;
};

/// force = qbar S (Cx, Cy, Cz); moment = qbar S (b Cl, c Cm, b Cn)
Wrench dimensionalize(const Coefficients& c, double dynamic_pressure, const Geometry& geometry);

struct CzAlpha {
    double per_rad = 0.0;
    bool one_sided = false;  // envelope edge forced a one-sided difference
};

/// Finite-difference dCz/dalpha at the given condition (central unless the
/// stencil would leave the envelope).
CzAlpha cz_alpha(const AeroModel& model, const AeroInput& condition, double step_deg = 0.5);

// --- Actuators -------------------------------------------------------------

struct ActuatorLimits {
    double time_constant = 0.0495;  // s
    double rate_limit = 60.0;       // deg/s
    double position_limit = 25.0;   // deg
};

struct ActuatorState {
    double position = 0.0;  // deg
    double command = 0.0;   // deg
};

/// First-order lag, then rate clamp, then position clamp.
ActuatorState actuator_step(const ActuatorState& state, const ActuatorLimits& limits, double command,
                            double dt);

/// Default limits for aileron, horizontal tail and rudder.
std::array<ActuatorLimits, 3> default_actuator_limits();

struct ActuatorBank {
    std::array<ActuatorLimits, 3> limits = default_actuator_limits();
    std::array<ActuatorState, 3> states{};

    Vec3 positions() const;
    Vec3 commands() const;
    void set_positions(const Vec3& deg);
    void step(const Vec3& command_deg, double dt);
};

// --- Propulsion ------------------------------------------------------------

struct ThrustModel {
    double max_thrust = 80000.0;  // N

    struct Output {
        double force = 0.0;     // body-x [N]
        bool clamped = false;   // setting was outside [0, 1]
    };
    Output thrust_force(double setting) const;
};

}  // namespace rlfep
