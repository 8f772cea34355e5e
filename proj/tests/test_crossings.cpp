#include <gtest/gtest.h>

#include <cmath>

#include "fwescape/crossings.hpp"
#include "fwescape/models/maier_stein.hpp"
#include "fwescape/shoot.hpp"

using namespace fwescape;

namespace {

Trajectory polyline(std::initializer_list<Vec2> xs, Vec2 p) {
    Trajectory t;
    for (const Vec2& x : xs) {
        TrajectoryPoint q;
        q.x = x;
        q.p = p;
        t.points.push_back(q);
    }
    return t;
}

Trajectory sampled_line(Vec2 a, Vec2 b, int n, Vec2 p) {
    Trajectory t;
    for (int k = 0; k <= n; ++k) {
        TrajectoryPoint q;
        const double w = static_cast<double>(k) / n;
        q.x = a + w * (b - a);
        q.p = p;
        t.points.push_back(q);
    }
    return t;
}

ShootingConfig saddle_config() {
    ShootingConfig cfg;
    cfg.max_time = 2e3;
    cfg.max_arc_length = 50.0;
    cfg.stops.push_back(stop_ball({0.0, 0.0}, 1e-4));
    cfg.stops.push_back(stop_coord0_below(0.0));  // basin boundary
    cfg.stops.push_back(stop_box({-2.5, -2.5}, {2.5, 2.5}));
    return cfg;
}

}  // namespace

TEST(DetectCrossings, TransversalPairIsReported) {
    const auto a = sampled_line({0.0, 0.25}, {1.0, 0.25}, 20, {0.0, 1.0});
    const auto b = sampled_line({0.5, -0.5}, {0.5, 1.0}, 20, {1.0, 0.0});
    const auto report = detect_crossings({a, b}, 1e-3, 0.1);
    ASSERT_EQ(report.size(), 1u);
    const auto& c = report.crossings.front();
    EXPECT_EQ(c.traj_a, 0u);
    EXPECT_EQ(c.traj_b, 1u);
    EXPECT_NEAR(c.x.x, 0.5, 1e-9);
    EXPECT_NEAR(c.x.y, 0.25, 1e-9);
    EXPECT_NEAR(c.momentum_mismatch, std::sqrt(2.0), 1e-9);
    EXPECT_LE(c.separation, 1e-12);
}

TEST(DetectCrossings, DisjointPathsGiveAnEmptyReport) {
    const auto a = sampled_line({0.0, 0.0}, {1.0, 0.0}, 10, {0.0, 1.0});
    const auto b = sampled_line({0.0, 0.5}, {1.0, 0.5}, 10, {1.0, 0.0});
    EXPECT_TRUE(detect_crossings({a, b}, 1e-3, 1e-2).empty());
}

TEST(DetectCrossings, TangentBranchesWithEqualMomentaAreExcluded) {
    const auto a = sampled_line({0.0, 0.0}, {1.0, 0.0}, 10, {0.3, 0.4});
    const auto b = sampled_line({0.0, 5e-4}, {1.0, 5e-4}, 10, {0.3, 0.4});
    EXPECT_TRUE(detect_crossings({a, b}, 1e-3, 1e-2).empty());
}

TEST(DetectCrossings, SharedSeedWithVanishingMomentaIsExcluded) {
    // Two rays leaving a common point, momenta growing with the distance:
    // inside the match ball the branches are not yet momentum-distinct.
    Trajectory a, b;
    for (int k = 0; k <= 40; ++k) {
        const double r = 0.05 * k;
        TrajectoryPoint qa, qb;
        qa.x = {r, 0.2 * r};
        qb.x = {r, -0.2 * r};
        qa.p = 0.1 * qa.x;
        qb.p = 0.1 * qb.x;
        a.points.push_back(qa);
        b.points.push_back(qb);
    }
    EXPECT_TRUE(detect_crossings({a, b}, 1e-3, 1e-2).empty());
}

TEST(DetectCrossings, SelfCrossingLoopIsFoundOnce) {
    Trajectory t = polyline({{0.0, 0.0}, {2.0, 0.0}, {2.0, 1.0}, {1.0, -1.0}}, {0.0, 1.0});
    t.points[2].p = {1.0, 0.0};
    t.points[3].p = {1.0, 0.0};
    const auto report = detect_crossings({t}, 1e-3, 1e-2);
    ASSERT_EQ(report.size(), 1u);
    EXPECT_NEAR(report.crossings.front().x.x, 1.5, 1e-9);
    EXPECT_NEAR(report.crossings.front().x.y, 0.0, 1e-9);
}

TEST(DetectCrossings, StraightPathHasNoSelfCrossings) {
    const auto t = sampled_line({0.0, 0.0}, {3.0, 1.0}, 50, {1.0, 0.0});
    EXPECT_TRUE(detect_crossings({t}, 1e-3, 1e-9).empty());
}

TEST(DetectCrossings, SphericalPathsMeetOnTheEmbeddedSphere) {
    auto embed = [](double th, double ph) {
        return Vec3{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
    };
    Trajectory a, b;
    for (int k = 0; k <= 40; ++k) {
        const double w = -0.5 + 1.0 * k / 40;
        TrajectoryPoint qa, qb;
        qa.x = {M_PI / 2, w};  // equator arc
        qa.m = embed(qa.x.x, qa.x.y);
        qa.pm = {0.0, 1.0, 0.0};
        qa.has_m = true;
        qb.x = {M_PI / 2 + w, 0.0};  // meridian arc
        qb.m = embed(qb.x.x, qb.x.y);
        qb.pm = {0.0, 0.0, -1.0};
        qb.has_m = true;
        a.points.push_back(qa);
        b.points.push_back(qb);
    }
    const auto report = detect_crossings({a, b}, 1e-3, 1e-2);
    ASSERT_EQ(report.size(), 1u);
    const auto& c = report.crossings.front();
    EXPECT_TRUE(c.has_m);
    EXPECT_LE(norm(c.m - Vec3{1.0, 0.0, 0.0}), 2e-3);
    EXPECT_NEAR(c.momentum_mismatch, std::sqrt(2.0), 1e-9);
}

TEST(DetectCrossings, CausticFanCrossesOnTheAxis) {
    models::MaierStein ms{5.0};
    FanConfig fc;
    fc.fan_size = 32;
    fc.seed_radius = 1e-3;
    const auto fan = fan_shoot(ms, {1.0, 0.0}, fc, saddle_config());
    const double ptol = 1e-2 * escape_momentum_scale(ms, fan.trajectories);
    const auto report = detect_crossings(fan.trajectories, 1e-3, ptol);
    ASSERT_FALSE(report.empty());
    // The fold focuses the fan onto the axis strictly between the fixed
    // points; mirror-partner members cross there with order-0.1 momentum gap.
    bool on_axis = false;
    for (const auto& c : report.crossings)
        if (c.x.x > 0.05 && c.x.x < 0.95 && std::abs(c.x.y) <= 1e-3 &&
            c.momentum_mismatch > 0.05)
            on_axis = true;
    EXPECT_TRUE(on_axis);
}

TEST(DetectCrossings, PreCausticFanIsCrossingFree) {
    models::MaierStein ms{3.0};
    FanConfig fc;
    fc.fan_size = 16;
    fc.seed_radius = 1e-3;
    const auto fan = fan_shoot(ms, {1.0, 0.0}, fc, saddle_config());
    const double ptol = 1e-2 * escape_momentum_scale(ms, fan.trajectories);
    const auto report = detect_crossings(fan.trajectories, 1e-3, ptol);
    EXPECT_TRUE(report.empty());
}
