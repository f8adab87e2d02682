#include "oracles.hpp"

#include "rlfep/config.hpp"
#include "rlfep/vehicle.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <random>

using namespace rlfep;

namespace {

void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a(i), b(i), tol) << "component " << i;
}

}  // namespace

TEST(Atmosphere, SeaLevelAndMonotoneDensity) {
    const Atmosphere sl = isa_atmosphere(0.0);
    EXPECT_NEAR(sl.density, 1.225, 1e-3);
    EXPECT_NEAR(sl.temperature, 288.15, 1e-9);
    EXPECT_NEAR(sl.speed_of_sound, 340.29, 0.01);
    double last = sl.density;
    for (double h = 500.0; h <= 20000.0; h += 500.0) {
        const Atmosphere a = isa_atmosphere(h);
        EXPECT_GT(a.density, 0.0);
        EXPECT_LT(a.density, last);
        last = a.density;
    }
    EXPECT_DOUBLE_EQ(sl.dynamic_pressure(100.0), 0.5 * sl.density * 1e4);
}

TEST(RigidBody, TranslationalExamples) {
    AircraftState s;
    expect_vec_near(translational_derivative(s, Vec3::Zero(), 1.0), Vec3::Zero(), 0.0);
    s.velocity_body = Vec3(100.0, 0.0, 0.0);
    s.omega = Vec3(0.0, 0.0, 0.1);
    // -w x V = -(0, 0, 0.1) x (100, 0, 0) = (0, -10, 0)
    expect_vec_near(translational_derivative(s, Vec3::Zero(), 1.0), Vec3(0.0, -10.0, 0.0), 1e-12);
    AircraftState still;
    expect_vec_near(translational_derivative(still, Vec3(2.0, 0.0, 0.0), 2.0), Vec3(1.0, 0.0, 0.0), 0.0);
}

TEST(RigidBody, RotationalExamples) {
    expect_vec_near(rotational_derivative(Vec3(0, 0, 1), Vec3::Zero(), Mat3::Identity()), Vec3::Zero(), 0.0);
    const Mat3 j = Vec3(1.0, 2.0, 3.0).asDiagonal();
    // J w = (1, 2, 3); w x Jw = (1*3 - 1*2, 1*1 - 1*3, 1*2 - 1*1) = (1, -2, 1)
    expect_vec_near(rotational_derivative(Vec3(1, 1, 1), Vec3::Zero(), j), Vec3(-1.0, 1.0, -1.0 / 3.0), 1e-15);
    const Vec3 target(0.3, -0.2, 0.7);
    expect_vec_near(rotational_derivative(Vec3::Zero(), j * target, j), target, 1e-15);
}

TEST(RigidBody, EulerKinematicsExamples) {
    expect_vec_near(euler_kinematics(Vec3(0, 0, 1), Vec3(std::numbers::pi / 2, 0, 0)), Vec3(0, -1, 0), 1e-15);
    EXPECT_THROW(euler_kinematics(Vec3(0, 0.1, 0), Vec3(0, std::numbers::pi / 2 - 1e-12, 0)), SingularityError);
}

TEST(RigidBody, EulerKinematicsIsIdentityAtLevelAttitude) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 w(u(rng), u(rng), u(rng));
        const Vec3 euler(0.0, 0.0, u(rng));
        expect_vec_near(euler_kinematics(w, euler), w, 1e-15);
    }
}

TEST(RigidBody, ZeroForceStepMovesPositionOnly) {
    MassProperties mp;
    mp.mass = 3.0;
    mp.inertia = Vec3(1.0, 2.0, 3.0).asDiagonal();
    AircraftState s;
    s.velocity_body = Vec3(10.0, 0.0, 0.0);
    const AircraftState n = step(s, Wrench{}, mp, 0.002);
    expect_vec_near(n.velocity_body, s.velocity_body, 0.0);
    expect_vec_near(n.omega, Vec3::Zero(), 0.0);
    expect_vec_near(n.position_ned, Vec3(0.02, 0.0, 0.0), 1e-15);
}

TEST(RigidBody, TorqueFreeSpinConservesMomentumAndEnergy) {
    const auto c = oracle::torque_free_drift();
    EXPECT_LT(c.momentum_rel, 1e-6);
    EXPECT_LT(c.energy_rel, 1e-6);
}

TEST(RigidBody, Rk4ConvergenceRatio) {
    const double ratio = oracle::rk4_convergence_ratio();
    EXPECT_GE(ratio, 12.0);
    EXPECT_LE(ratio, 20.0);
}

TEST(RigidBody, StepIsBitDeterministic) {
    MassProperties mp = MassProperties::f16_nominal();
    AircraftState s;
    s.velocity_body = Vec3(200.0, 3.0, 10.0);
    s.omega = Vec3(0.2, 0.1, -0.05);
    s.euler = Vec3(0.3, 0.1, 1.0);
    const Wrench w{Vec3(1000.0, -50.0, -90000.0), Vec3(300.0, -2000.0, 10.0)};
    const AircraftState a = step(s, w, mp, 0.002);
    const AircraftState b = step(s, w, mp, 0.002);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof(AircraftState)), 0);
}

TEST(RigidBody, RejectsBadStepAndNonFiniteState) {
    MassProperties mp = MassProperties::f16_nominal();
    AircraftState s;
    s.velocity_body = Vec3(200.0, 0.0, 0.0);
    EXPECT_THROW(step(s, Wrench{}, mp, 0.01), ConfigError);
    EXPECT_THROW(step(s, Wrench{}, mp, 0.0), ConfigError);
    Wrench bad;
    bad.force.x() = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(step(s, bad, mp, 0.002), IntegrityError);
}

TEST(MassProperties, ValidationCatchesBadInertia) {
    EXPECT_NO_THROW(MassProperties::f16_nominal().validate());
    MassProperties mp;
    mp.inertia = Vec3(1.0, 1.0, 3.0).asDiagonal();  // 1 + 1 < 3
    EXPECT_THROW(mp.validate(), ConfigError);
    mp.inertia = Mat3::Identity();
    mp.inertia(0, 1) = 0.2;  // asymmetric
    EXPECT_THROW(mp.validate(), ConfigError);
    mp.inertia = Mat3::Identity();
    mp.mass = -1.0;
    EXPECT_THROW(mp.validate(), ConfigError);
}

// --- trim ---------------------------------------------------------------------

TEST(Trim, NominalConditionConvergesInPhysicalRange) {
    const WorkbenchConfig cfg = WorkbenchConfig::defaults();
    const auto vehicle = build_vehicle(cfg);
    const TrimResult t = trim_level_flight(*vehicle, 0.6, 500.0);
    EXPECT_LT(t.residuals.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GT(t.alpha_deg, 0.0);
    EXPECT_LT(t.alpha_deg, 15.0);
    EXPECT_EQ(t.state.euler.x(), 0.0);
    EXPECT_EQ(t.state.omega, Vec3::Zero());
    EXPECT_NEAR(t.state.altitude(), 500.0, 1e-9);
    EXPECT_NEAR(t.state.airspeed() / isa_atmosphere(500.0).speed_of_sound, 0.6, 1e-12);
    EXPECT_LT(oracle::nominal_trim_residual(), 1e-8);
}

TEST(Trim, HoldsAngleOfAttackOpenLoopForTenSeconds) {
    const WorkbenchConfig cfg = WorkbenchConfig::defaults();
    const auto vehicle = build_vehicle(cfg);
    const TrimResult t = trim_level_flight(*vehicle, 0.6, 500.0);
    AircraftState s = t.state;
    double worst = 0.0;
    for (int i = 0; i < 5000; ++i) {
        s = vehicle->advance(s, t.deflections_deg, t.thrust_n, 0.002);
        worst = std::max(worst, std::abs(rad2deg(s.alpha()) - t.alpha_deg));
    }
    EXPECT_LT(worst, 0.5);
}

TEST(Trim, OutsideEnvelopeIsATrimError) {
    const auto vehicle = build_vehicle(WorkbenchConfig::defaults());
    EXPECT_THROW(trim_level_flight(*vehicle, 1.5, 500.0), TrimError);
    EXPECT_THROW(trim_level_flight(*vehicle, 0.6, 40000.0), TrimError);
}
