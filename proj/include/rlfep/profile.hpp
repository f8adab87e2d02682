#pragma once

#include "rlfep/common.hpp"

#include <vector>

namespace rlfep {

/// Linear piece from (start, from) to (end, to); constant when from == to.
struct Segment {
    double start = 0.0;  // s
    double end = 0.0;    // s
    double from = 0.0;
    double to = 0.0;
};

/// Piecewise-linear signal. Segments must be contiguous and start at t = 0.
class PiecewiseProfile {
public:
    PiecewiseProfile() = default;
    explicit PiecewiseProfile(std::vector<Segment> segments);

    static PiecewiseProfile constant(double value, double duration);

    double value(double t) const;
    /// True when the segments cover [0, duration] without gaps.
    bool covers(double duration) const;
    const std::vector<Segment>& segments() const { return segments_; }

private:
    std::vector<Segment> segments_;
};

/// Pilot body-rate commands in deg/s.
struct CommandProfile {
    PiecewiseProfile p;
    PiecewiseProfile q;
    PiecewiseProfile r;

    Vec3 at(double t) const { return {p.value(t), q.value(t), r.value(t)}; }
    /// Throws ConfigError unless every channel covers the duration.
    void validate(double duration) const;

    static CommandProfile constant(double p_cmd, double q_cmd, double r_cmd, double duration);
};

}  // namespace rlfep
