#include "rlfep/profile.hpp"

namespace rlfep {

PiecewiseProfile::PiecewiseProfile(std::vector<Segment> segments) : segments_(std::move(segments)) {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        if (!(s.end > s.start)) throw ConfigError("profile segment must have positive length");
        if (!std::isfinite(s.from) || !std::isfinite(s.to)) throw ConfigError("profile values must be finite");
        if (i > 0 && std::abs(s.start - segments_[i - 1].end) > 1e-9) {
            throw ConfigError("profile segments must be contiguous");
        }
    }
    if (!segments_.empty() && std::abs(segments_.front().start) > 1e-12) {
        throw ConfigError("profile must start at t = 0");
    }
}

PiecewiseProfile PiecewiseProfile::constant(double value, double duration) {
    return PiecewiseProfile({Segment{0.0, duration, value, value}});
}

double PiecewiseProfile::value(double t) const {
    if (segments_.empty()) return 0.0;
    for (const auto& s : segments_) {
        if (t < s.end) {
            if (t <= s.start) return s.from;
            return s.from + (s.to - s.from) * (t - s.start) / (s.end - s.start);
        }
    }
    return segments_.back().to;
}

bool PiecewiseProfile::covers(double duration) const {
    return !segments_.empty() && segments_.back().end >= duration - 1e-9;
}

void CommandProfile::validate(double duration) const {
    if (!p.covers(duration) || !q.covers(duration) || !r.covers(duration)) {
        throw ConfigError("command profile does not cover the episode duration");
    }
}

CommandProfile CommandProfile::constant(double p_cmd, double q_cmd, double r_cmd, double duration) {
    return {PiecewiseProfile::constant(p_cmd, duration), PiecewiseProfile::constant(q_cmd, duration),
            PiecewiseProfile::constant(r_cmd, duration)};
}

}  // namespace rlfep
