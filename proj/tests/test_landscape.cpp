#include <gtest/gtest.h>

#include <cmath>

#include "fwescape/landscape.hpp"
#include "fwescape/models/double_well.hpp"
#include "fwescape/models/macrospin.hpp"
#include "fwescape/models/maier_stein.hpp"

using namespace fwescape;

namespace {

struct NoCriticalPoint {
    Vec2 drift(Vec2 x) const { return {std::exp(x.x), 1.0}; }
    Metric2 metric(Vec2) const { return Metric2::flat(); }
};

int count_type(const std::vector<Extremum>& es, ExtremumType t) {
    int n = 0;
    for (const auto& e : es)
        n += e.type == t;
    return n;
}

const Extremum* nearest(const std::vector<Extremum>& es, Vec2 x) {
    const Extremum* best = nullptr;
    double d = 1e300;
    for (const auto& e : es) {
        const double r = std::hypot(e.x.x - x.x, e.x.y - x.y);
        if (r < d) {
            d = r;
            best = &e;
        }
    }
    return best;
}

}  // namespace

TEST(GridSpec, NodesSpanTheBoxExactly) {
    const GridSpec g{{-1.0, 0.5}, {3.0, 2.5}, 5, 3};
    EXPECT_EQ(g.node(0, 0).x, -1.0);
    EXPECT_EQ(g.node(0, 0).y, 0.5);
    EXPECT_EQ(g.node(4, 2).x, 3.0);
    EXPECT_EQ(g.node(4, 2).y, 2.5);
    EXPECT_DOUBLE_EQ(g.spacing().x, 1.0);
    EXPECT_DOUBLE_EQ(g.spacing().y, 1.0);
    EXPECT_TRUE(g.contains({0.0, 1.0}));
    EXPECT_FALSE(g.contains({0.0, 3.0}));
}

TEST(NormGrid, FixedPointNodeIsExactlyZero) {
    const models::MaierStein ms{3.0};
    const GridSpec grid{{0.0, -0.5}, {2.0, 0.5}, 201, 101};
    const auto L = norm_grid(ms, grid);
    EXPECT_EQ(grid.node(100, 50).x, 1.0);
    EXPECT_EQ(grid.node(100, 50).y, 0.0);
    EXPECT_EQ(L.at(100, 50), 0.0);
    for (double v : L.values)
        EXPECT_GE(v, 0.0);
}

TEST(NormGrid, MidpointNodeValue) {
    const models::MaierStein ms{3.0};
    const GridSpec grid{{0.0, -0.5}, {1.0, 0.5}, 101, 101};
    const auto L = norm_grid(ms, grid);
    EXPECT_EQ(grid.node(50, 50).x, 0.5);
    EXPECT_DOUBLE_EQ(L.at(50, 50), 0.140625);
}

TEST(NormGrid, ChartViolationThrows) {
    const models::MacrospinChart model{{{0.01, 0.0, -0.3, 0.0}},
                                       models::SphericalChart::z_pole()};
    const GridSpec bad{{-0.1, 0.0}, {1.0, 1.0}, 8, 8};
    EXPECT_THROW(norm_grid(model, bad), std::domain_error);
    const GridSpec good{{0.2, 0.0}, {1.0, 1.0}, 8, 8};
    EXPECT_NO_THROW(norm_grid(model, good));
}

TEST(NormGrid, MacrospinSplitsIntoPrecessionalAndDriveTerms) {
    const double alpha = 0.01;
    const double D = 20.0;
    const double I = -0.8 * models::critical_current(D, 0.0);
    const double omega = 0.1 * models::critical_angle(D);
    const models::MacrospinChart model{{{alpha, D, I, omega}},
                                       models::SphericalChart::z_pole()};
    const GridSpec grid{{0.2, -3.0}, {2.9, 3.0}, 64, 64};
    const auto L = norm_grid(model, grid);
    ASSERT_EQ(L.precessional.size(), L.values.size());
    ASSERT_EQ(L.nongradient.size(), L.values.size());
    // The two emitted terms are the exact lowest-order split: the remainder
    // is the squared damping-like part, nonnegative and O(alpha^2).
    const double bound = alpha * alpha * (D + std::abs(I)) * (D + std::abs(I));
    for (std::size_t k = 0; k < L.values.size(); ++k) {
        const double rem = L.values[k] - L.precessional[k] - L.nongradient[k];
        EXPECT_GE(rem, -1e-12);
        EXPECT_LE(rem, bound);
    }

    const models::MacrospinChart quiet{{{alpha, D, 0.0, omega}},
                                       models::SphericalChart::z_pole()};
    const auto L0 = norm_grid(quiet, grid);
    for (double v : L0.nongradient)
        EXPECT_EQ(v, 0.0);
}

TEST(NormGradient, MatchesFiniteDifferencesOnACurvedChart) {
    const models::MacrospinChart model{{{0.01, 20.0, -3.0, 0.3}},
                                       models::SphericalChart::z_pole()};
    const models::MaierStein ms{4.2};
    const Vec2 pts[] = {{0.7, 1.3}, {1.9, -0.4}, {2.4, 2.0}};
    for (const Vec2 x : pts) {
        const Vec2 g = norm_gradient(model, x);
        for (int k = 0; k < 2; ++k) {
            const double h = 1e-6;
            Vec2 xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            const double fd =
                (drift_norm2(model, xp) - drift_norm2(model, xm)) / (2.0 * h);
            EXPECT_NEAR(g[k], fd, 1e-5 * (1.0 + std::abs(fd)));
        }
        const Vec2 gm = norm_gradient(ms, x);
        for (int k = 0; k < 2; ++k) {
            const double h = 1e-6;
            Vec2 xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            const double fd =
                (drift_norm2(ms, xp) - drift_norm2(ms, xm)) / (2.0 * h);
            EXPECT_NEAR(gm[k], fd, 1e-5 * (1.0 + std::abs(fd)));
        }
    }
}

TEST(Extrema, MaierSteinBelowThresholdCensus) {
    const models::MaierStein ms{3.0};
    GridSpec grid{{-0.2, -0.6}, {1.4, 0.6}, 256, 256};
    auto L = norm_grid(ms, grid);
    const auto& es = find_and_classify_extrema(ms, L);
    ASSERT_EQ(es.size(), 3u);
    EXPECT_EQ(count_type(es, ExtremumType::minimum), 2);
    EXPECT_EQ(count_type(es, ExtremumType::saddle), 1);
    for (const auto& e : es) {
        EXPECT_TRUE(e.refined);
        EXPECT_FALSE(e.degenerate);
        const Vec2 g = norm_gradient(ms, e.x);
        EXPECT_LE(std::hypot(g.x, g.y), 1e-8);
        EXPECT_NEAR(e.x.y, 0.0, 1e-7);
    }
    const Extremum* origin = nearest(es, {0.0, 0.0});
    EXPECT_NEAR(origin->x.x, 0.0, 1e-7);
    EXPECT_LE(origin->value, 1e-12);
    EXPECT_NEAR(origin->lambda[0], 2.0, 1e-4);
    EXPECT_NEAR(origin->lambda[1], 2.0, 1e-4);
    const Extremum* node = nearest(es, {1.0, 0.0});
    EXPECT_NEAR(node->x.x, 1.0, 1e-7);
    EXPECT_LE(node->value, 1e-12);
    EXPECT_NEAR(node->lambda[0], 8.0, 1e-4);
    const Extremum* saddle = nearest(es, {0.577, 0.0});
    EXPECT_EQ(saddle->type, ExtremumType::saddle);
    EXPECT_NEAR(saddle->x.x, std::sqrt(1.0 / 3.0), 1e-6);
    EXPECT_NEAR(saddle->value, 4.0 / 27.0, 1e-9);
    EXPECT_NEAR(saddle->lambda[0], 8.0 / 9.0, 1e-4);
    EXPECT_NEAR(saddle->lambda[1], -8.0 / 3.0, 1e-4);
}

TEST(Extrema, MaierSteinAboveThresholdGrowsTheOffAxisPair) {
    const models::MaierStein ms{5.0};
    GridSpec grid{{-0.2, -0.6}, {1.4, 0.6}, 256, 256};
    auto L = norm_grid(ms, grid);
    const auto& es = find_and_classify_extrema(ms, L);
    ASSERT_EQ(es.size(), 5u);
    EXPECT_EQ(count_type(es, ExtremumType::minimum), 2);
    EXPECT_EQ(count_type(es, ExtremumType::maximum), 1);
    EXPECT_EQ(count_type(es, ExtremumType::saddle), 2);

    const Extremum* peak = nearest(es, {0.577, 0.0});
    EXPECT_EQ(peak->type, ExtremumType::maximum);
    EXPECT_NEAR(peak->x.x, std::sqrt(1.0 / 3.0), 1e-6);
    EXPECT_NEAR(peak->x.y, 0.0, 1e-7);
    EXPECT_NEAR(peak->lambda[0], -8.0 / 9.0, 1e-4);

    // The transverse dip pair straddles the axis symmetrically.  Each point
    // is a minimum of the transverse profile (the surface still falls away
    // along the ridge, so the full Hessian signature is a saddle).
    const Extremum* up = nearest(es, {0.577, 0.16});
    const Extremum* dn = nearest(es, {0.577, -0.16});
    ASSERT_NE(up, dn);
    EXPECT_EQ(up->type, ExtremumType::saddle);
    EXPECT_EQ(dn->type, ExtremumType::saddle);
    EXPECT_NEAR(up->x.y + dn->x.y, 0.0, 1e-7);
    EXPECT_NEAR(up->x.y, std::sqrt(2.0 / 75.0), 1e-6);
    EXPECT_NEAR(up->value, dn->value, 1e-12);
    EXPECT_NEAR(up->value, 32.0 / 225.0, 1e-6);
    EXPECT_LT(up->value, peak->value);
    const double off_profile =
        drift_norm2(ms, {up->x.x, 2.0 * up->x.y});
    EXPECT_LT(up->value, off_profile);
}

TEST(Extrema, DoubleWellFixedPointsAreAllNormMinima) {
    const models::DoubleWell dw;
    GridSpec grid{{-1.5, -0.8}, {1.5, 0.8}, 256, 256};
    auto L = norm_grid(dw, grid);
    const auto& es = find_and_classify_extrema(dw, L);
    ASSERT_EQ(es.size(), 5u);
    EXPECT_EQ(count_type(es, ExtremumType::minimum), 3);
    EXPECT_EQ(count_type(es, ExtremumType::saddle), 2);
    for (double cx : {-1.0, 0.0, 1.0}) {
        const Extremum* e = nearest(es, {cx, 0.0});
        EXPECT_EQ(e->type, ExtremumType::minimum);
        EXPECT_NEAR(e->x.x, cx, 1e-7);
        EXPECT_LE(e->value, 1e-12);
    }
    for (double cx : {-1.0, 1.0}) {
        const Extremum* s = nearest(es, {cx * 0.577, 0.0});
        EXPECT_EQ(s->type, ExtremumType::saddle);
        EXPECT_NEAR(s->value, 4.0 / 27.0, 1e-9);
        EXPECT_NEAR(s->lambda[0], 2.0, 1e-4);
        EXPECT_NEAR(s->lambda[1], -8.0 / 3.0, 1e-4);
    }
}

TEST(Extrema, PolishFailsHonestlyWithoutACriticalPoint) {
    const NoCriticalPoint model;
    Vec2 x{0.3, 0.2};
    const Vec2 before = x;
    EXPECT_FALSE(
        polish_extremum(model, x, {-1.0, -1.0}, {1.0, 1.0}, 0.5));
    EXPECT_EQ(x.x, before.x);
    EXPECT_EQ(x.y, before.y);
}

TEST(Bifurcation, MaierSteinSaddleFlipsAtFour) {
    auto fam = [](double a) { return models::MaierStein{a}; };
    const auto r = bifurcation_scan(fam, {0.577, 0.0}, 3.0, 5.0, 41);
    ASSERT_TRUE(r.found);
    EXPECT_LE(r.hi - r.lo, 1e-3);
    EXPECT_NEAR(r.threshold, 4.0, 2e-3);
    ASSERT_EQ(r.steps.size(), 41u);
    EXPECT_EQ(r.steps.front().extremum.type, ExtremumType::saddle);
    EXPECT_EQ(r.steps.back().extremum.type, ExtremumType::maximum);
    // The transverse eigenvalue decreases monotonically through the flip.
    for (std::size_t k = 1; k < r.steps.size(); ++k) {
        ASSERT_TRUE(r.steps[k].tracked);
        EXPECT_LT(r.steps[k].extremum.lambda[0],
                  r.steps[k - 1].extremum.lambda[0]);
    }
}

TEST(Bifurcation, NotFoundBelowTheThresholdRange) {
    auto fam = [](double a) { return models::MaierStein{a}; };
    const auto r = bifurcation_scan(fam, {0.577, 0.0}, 1.0, 2.0, 21);
    EXPECT_FALSE(r.found);
    for (const auto& st : r.steps)
        EXPECT_EQ(st.extremum.type, ExtremumType::saddle);
}
