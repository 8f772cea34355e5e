#include <gtest/gtest.h>

#include <cmath>
#include <utility>

#include "fwescape/loop.hpp"
#include "fwescape/models/double_well.hpp"
#include "fwescape/models/macrospin.hpp"
#include "fwescape/models/maier_stein.hpp"
#include "fwescape/trajectory.hpp"

using namespace fwescape;

TEST(AccumulateAction, ReversedDriftPolylineRecoversDoubleBarrier) {
    // Uphill segment of the gradient double well: p = -2F along the axis,
    // so S = 2 [U(saddle) - U(min)] = 1/2.
    models::DoubleWell dw;
    Trajectory traj;
    const int n = 4000;
    for (int k = 0; k <= n; ++k) {
        TrajectoryPoint q;
        q.x = {1.0 - static_cast<double>(k) / n, 0.0};
        q.p = -2.0 * dw.drift(q.x);
        traj.points.push_back(q);
    }
    EXPECT_NEAR(accumulate_action(traj), 0.5, 1e-7);
}

namespace {

auto circle(Vec2 c, double r) {
    return [=](double tau) {
        const Vec2 x{c.x + r * std::cos(tau), c.y + r * std::sin(tau)};
        const Vec2 xp{-r * std::sin(tau), r * std::cos(tau)};
        return std::pair{x, xp};
    };
}

auto wobbly(Vec2 c) {
    return [=](double tau) {
        const double r = 0.3 + 0.05 * std::cos(3.0 * tau);
        const double rp = -0.15 * std::sin(3.0 * tau);
        const Vec2 x{c.x + r * std::cos(tau), c.y + r * std::sin(tau)};
        const Vec2 xp{rp * std::cos(tau) - r * std::sin(tau), rp * std::sin(tau) + r * std::cos(tau)};
        return std::pair{x, xp};
    };
}

}  // namespace

TEST(LoopDecomposition, FluxVanishesForGradientField) {
    models::MaierStein grad{1.0};
    for (auto&& loop : {circle({0.5, 0.2}, 0.2), circle({-0.3, 0.1}, 0.35)}) {
        const auto d = loop_decomposition(grad, loop, 512);
        EXPECT_NEAR(d.flux, 0.0, 1e-10);
        EXPECT_GT(d.geometric, 0.0);
    }
    const auto d = loop_decomposition(grad, wobbly({0.4, -0.1}), 512);
    EXPECT_NEAR(d.flux, 0.0, 1e-10);
}

TEST(LoopDecomposition, TwoRoutesAgreeAndConvergeSpectrally) {
    for (double a : {1.0, 3.0, 5.0}) {
        models::MaierStein ms{a};
        const auto d512 = loop_decomposition(ms, circle({0.5, 0.2}, 0.2), 512);
        EXPECT_NEAR(d512.total_alt, d512.total, 1e-12 * std::abs(d512.total));
        const auto d1024 = loop_decomposition(ms, circle({0.5, 0.2}, 0.2), 1024);
        EXPECT_NEAR(d512.total, d1024.total, 1e-10);
        const auto w512 = loop_decomposition(ms, wobbly({0.3, 0.15}), 512);
        EXPECT_NEAR(w512.total_alt, w512.total, 1e-12 * std::abs(w512.total));
    }
}

TEST(LoopDecomposition, OrientationFlipsFluxKeepsGeometric) {
    models::MaierStein ms{3.0};
    auto fwd = circle({0.5, 0.2}, 0.2);
    auto bwd = [&](double tau) {
        auto [x, xp] = fwd(2.0 * M_PI - tau);
        return std::pair{x, -1.0 * xp};
    };
    const auto df = loop_decomposition(ms, fwd, 512);
    const auto db = loop_decomposition(ms, bwd, 512);
    EXPECT_NEAR(df.geometric, db.geometric, 1e-12);
    EXPECT_NEAR(df.flux, -db.flux, 1e-12);
}

TEST(LoopDecomposition, CurvedMetricRoutesAgree) {
    models::MacrospinChart mc{models::Macrospin{{0.02, 20.0, -14.0, 0.1}},
                              models::SphericalChart::x_pole()};
    auto loop = circle({1.2, 0.7}, 0.25);
    const auto d = loop_decomposition(mc, loop, 512);
    EXPECT_NEAR(d.total_alt, d.total, 1e-12 * std::abs(d.total));
    const auto d2 = loop_decomposition(mc, loop, 1024);
    EXPECT_NEAR(d.total, d2.total, 1e-9 * std::abs(d.total));
}
