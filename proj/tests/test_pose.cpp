#include <doctest.h>

#include "linn/pose.hpp"

using namespace linn;

namespace {

PoseTrack two_knot_track() {
    PoseTrack t;
    t.rate = 120.0;
    t.poses.push_back(Pose::make({0, 0, 0}, {0, 0, 0, 1}));
    t.poses.push_back(Pose::make({1, 0, 0}, {0, 0, 0, 1}));
    return t;
}

}  // namespace

TEST_CASE("pose construction normalizes the quaternion") {
    auto p = Pose::make({1, 2, 3}, {0, 0, 0, 0.5});
    CHECK(p.quat_norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.orientation[3] == doctest::Approx(1.0));
    CHECK_THROWS_AS(Pose::make({0, 0, 0}, {0, 0, 0, 0}), ConfigError);
}

TEST_CASE("track_sample hits knots exactly and interpolates between them") {
    auto t = two_knot_track();
    CHECK(track_sample(t, 0.0).position[0] == 0.0);
    CHECK(track_sample(t, 1.0 / 120.0).position[0] == 1.0);
    CHECK(track_sample(t, 0.5 / 120.0).position[0] == doctest::Approx(0.5).epsilon(1e-12));

    PoseTrack empty;
    CHECK_THROWS_AS(track_sample(empty, 0.0), ConfigError);
}

TEST_CASE("times outside the track clamp to the endpoints") {
    auto t = two_knot_track();
    CHECK(track_sample(t, -5.0).position[0] == 0.0);
    CHECK(track_sample(t, 5.0).position[0] == 1.0);
}

TEST_CASE("quaternion blending takes the shorter arc under sign flips") {
    PoseTrack t;
    t.rate = 120.0;
    std::array<double, 4> q{0.3, -0.1, 0.2, 0.9273618495495704};  // unit
    auto flipped = q;
    for (auto& v : flipped) v = -v;
    t.poses.push_back(Pose::make({0, 0, 0}, q));
    t.poses.push_back(Pose::make({0, 0, 0}, flipped));
    Pose mid = track_sample(t, 0.5 / 120.0);
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(mid.orientation[static_cast<size_t>(i)] - q[static_cast<size_t>(i)]) < 1e-12);
}

TEST_CASE("interpolated quaternions stay unit-norm") {
    Rng rng(4);
    PoseTrack t;
    t.rate = 120.0;
    for (int k = 0; k < 10; ++k) {
        std::array<double, 4> q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
        t.poses.push_back(Pose::make({rng.uniform(), rng.uniform(), rng.uniform()}, q));
    }
    for (int i = 0; i < 200; ++i) {
        Pose p = track_sample(t, rng.uniform(0.0, t.duration()));
        CHECK(std::abs(p.quat_norm() - 1.0) < 1e-6);
    }
}

TEST_CASE("track_sample is numerically continuous") {
    Rng rng(8);
    PoseTrack t;
    t.rate = 120.0;
    for (int k = 0; k < 6; ++k)
        t.poses.push_back(Pose::make({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)},
                                     {0, 0, 0, 1}));
    double eps = 1e-6;
    for (double time : {0.001, 0.0083, 0.02, 0.041}) {
        Pose a = track_sample(t, time);
        Pose b = track_sample(t, time + eps);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(a.position[static_cast<size_t>(i)] - b.position[static_cast<size_t>(i)]) < 1e-3);
    }
}

TEST_CASE("sample_to_audio_rate lands on knots every fs/rate samples") {
    auto t = two_knot_track();
    auto samples = sample_to_audio_rate(t, 801, 48000.0);
    CHECK(samples.size() == 801);
    CHECK(samples[0].position[0] == 0.0);
    CHECK(samples[400].position[0] == doctest::Approx(1.0).epsilon(1e-9));  // 48000/120 = 400
    CHECK(samples[200].position[0] == doctest::Approx(0.5).epsilon(1e-9));

    PoseTrack constant;
    constant.rate = 120.0;
    constant.poses.push_back(Pose::make({2, 3, 4}, {0, 0, 0, 1}));
    auto cs = sample_to_audio_rate(constant, 100, 48000.0);
    for (const auto& p : cs) CHECK(p.position[0] == 2.0);
}

TEST_CASE("track_window re-times the sub-track to its own origin") {
    Rng rng(13);
    PoseTrack t;
    t.rate = 120.0;
    for (int k = 0; k < 240; ++k)
        t.poses.push_back(Pose::make({rng.uniform(-2, 2), rng.uniform(-2, 2), 0}, {0, 0, 0, 1}));
    double t0 = 0.8;
    auto sub = track_window(t, t0, 0.5);
    CHECK(sub.duration() >= 0.5);
    for (int i = 0; i < 30; ++i) {
        double local = rng.uniform(0.0, 0.5);
        Pose a = track_sample(sub, local);
        Pose b = track_sample(t, t0 + local);
        for (int j = 0; j < 3; ++j)
            CHECK(a.position[static_cast<size_t>(j)] ==
                  doctest::Approx(b.position[static_cast<size_t>(j)]).epsilon(1e-9));
    }
}
