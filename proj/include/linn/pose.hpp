#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "linn/common.hpp"

namespace linn {

// Source pose relative to the listener: position in meters plus a unit
// quaternion in (x, y, z, w) component order.
struct Pose {
    std::array<double, 3> position{0.0, 0.0, 0.0};
    std::array<double, 4> orientation{0.0, 0.0, 0.0, 1.0};  // x y z w

    static Pose make(std::array<double, 3> p, std::array<double, 4> q) {
        Pose pose;
        pose.position = p;
        double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
        if (n <= 0.0) throw ConfigError("pose: zero quaternion");
        for (auto& v : q) v /= n;
        pose.orientation = q;
        return pose;
    }

    double quat_norm() const {
        const auto& q = orientation;
        return std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    }
};

// Uniformly sampled pose sequence (default 120 Hz). Knot k sits at time k/rate.
struct PoseTrack {
    double rate = 120.0;
    std::vector<Pose> poses;

    double duration() const {
        return poses.empty() ? 0.0 : static_cast<double>(poses.size() - 1) / rate;
    }

    void validate() const {
        if (poses.empty()) throw ConfigError("pose track: empty");
        if (rate <= 0.0) throw ConfigError("pose track: rate must be positive");
    }
};

// Position lerp, orientation nlerp with sign alignment to the shorter arc.
// Times outside the track clamp to the endpoints.
inline Pose track_sample(const PoseTrack& track, double time) {
    track.validate();
    const auto& ps = track.poses;
    if (ps.size() == 1) return ps[0];
    double u = time * track.rate;
    if (u <= 0.0) return ps.front();
    double last = static_cast<double>(ps.size() - 1);
    if (u >= last) return ps.back();
    int64_t k = static_cast<int64_t>(u);
    double frac = u - static_cast<double>(k);
    if (frac == 0.0) return ps[static_cast<size_t>(k)];
    const Pose& a = ps[static_cast<size_t>(k)];
    const Pose& b = ps[static_cast<size_t>(k + 1)];
    Pose out;
    for (int i = 0; i < 3; ++i)
        out.position[static_cast<size_t>(i)] =
            (1.0 - frac) * a.position[static_cast<size_t>(i)] + frac * b.position[static_cast<size_t>(i)];
    double dot = 0.0;
    for (int i = 0; i < 4; ++i) dot += a.orientation[static_cast<size_t>(i)] * b.orientation[static_cast<size_t>(i)];
    double sign = dot < 0.0 ? -1.0 : 1.0;
    std::array<double, 4> q;
    for (int i = 0; i < 4; ++i)
        q[static_cast<size_t>(i)] = (1.0 - frac) * a.orientation[static_cast<size_t>(i)] +
                                    frac * sign * b.orientation[static_cast<size_t>(i)];
    double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (n <= 0.0) throw InternalError("track_sample: degenerate quaternion blend");
    for (auto& v : q) v /= n;
    out.orientation = q;
    return out;
}

// Pose at time i/fs for i in [0, n_samples).
inline std::vector<Pose> sample_to_audio_rate(const PoseTrack& track, int64_t n_samples, double fs) {
    if (fs <= 0.0) throw ConfigError("sample_to_audio_rate: fs must be positive");
    std::vector<Pose> out;
    out.reserve(static_cast<size_t>(n_samples));
    for (int64_t i = 0; i < n_samples; ++i)
        out.push_back(track_sample(track, static_cast<double>(i) / fs));
    return out;
}

// Sub-track covering [t0, t0 + duration], re-timed so knot 0 is at t0.
inline PoseTrack track_window(const PoseTrack& track, double t0, double duration) {
    track.validate();
    PoseTrack sub;
    sub.rate = track.rate;
    int64_t knots = static_cast<int64_t>(std::ceil(duration * track.rate)) + 2;
    sub.poses.reserve(static_cast<size_t>(knots));
    for (int64_t k = 0; k < knots; ++k)
        sub.poses.push_back(track_sample(track, t0 + static_cast<double>(k) / track.rate));
    return sub;
}

}  // namespace linn
