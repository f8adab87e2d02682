#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rlfep {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kGravity = 9.80665;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kDegToRad; }
constexpr double rad2deg(double rad) { return rad * kRadToDeg; }

// Error hierarchy. Callers that only care about "something went wrong in the
// simulation stack" catch rlfep::Error.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (bad inertia, shape mismatch, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// Non-finite value produced while integrating or evaluating the model.
struct IntegrityError : Error {
    using Error::Error;
};

/// Euler-angle kinematics evaluated too close to cos(theta) = 0.
struct SingularityError : IntegrityError {
    using IntegrityError::IntegrityError;
};

struct TrimError : Error {
    using Error::Error;
};

/// Control allocation failed (rank-deficient or ill-conditioned effectivity).
struct ControllerError : Error {
    ControllerError(const std::string& what, double condition)
        : Error(what), condition_number(condition) {}
    double condition_number;
};

/// Non-finite loss or gradient during agent training.
struct TrainingError : Error {
    using Error::Error;
};

struct CheckpointError : Error {
    using Error::Error;
};

/// Malformed input file. `line` is 1-based, 0 when not applicable.
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line_no)
        : Error(line_no ? what + " (line " + std::to_string(line_no) + ")" : what),
          detail(what),
          line(line_no) {}
    std::string detail;
    std::size_t line;
};

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace rlfep
