#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fwescape/fw.hpp"
#include "fwescape/models/double_well.hpp"
#include "fwescape/models/maier_stein.hpp"

using namespace fwescape;

TEST(MaierStein, FixedPointsAndLinearisation) {
    for (double a : {1.0, 3.0, 5.0}) {
        models::MaierStein ms{a};
        EXPECT_NEAR(norm(ms.drift({1.0, 0.0})), 0.0, 1e-15);
        EXPECT_NEAR(norm(ms.drift({-1.0, 0.0})), 0.0, 1e-15);
        EXPECT_NEAR(norm(ms.drift({0.0, 0.0})), 0.0, 1e-15);
        // The attractor linearisation is -2 I for every anisotropy.
        const Mat2 A = ms.drift_jacobian({1.0, 0.0});
        EXPECT_NEAR(A.m[0][0], -2.0, 1e-15);
        EXPECT_NEAR(A.m[1][1], -2.0, 1e-15);
        EXPECT_NEAR(A.m[0][1], 0.0, 1e-15);
        EXPECT_NEAR(A.m[1][0], 0.0, 1e-15);
    }
    models::MaierStein ms{3.0};
    const Mat2 S = ms.drift_jacobian({0.0, 0.0});
    EXPECT_NEAR(S.m[0][0], 1.0, 1e-15);
    EXPECT_NEAR(S.m[1][1], -1.0, 1e-15);
}

TEST(MaierStein, JacobianMatchesFiniteDifferences) {
    models::MaierStein ms{3.0};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec2 x{u(rng), u(rng)};
        const Mat2 ja = ms.drift_jacobian(x);
        const Mat2 jf = drift_jacobian_fd(ms, x);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                EXPECT_NEAR(ja.m[i][j], jf.m[i][j], 1e-8);
    }
}

TEST(MaierStein, CurlVanishesOnlyInGradientCase) {
    auto curl = [](const models::MaierStein& m, Vec2 x) {
        const Mat2 j = m.drift_jacobian(x);
        return j.m[1][0] - j.m[0][1];
    };
    models::MaierStein grad{1.0};
    models::MaierStein rot{3.0};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec2 x{u(rng), u(rng)};
        EXPECT_NEAR(curl(grad, x), 0.0, 1e-14);
        EXPECT_NEAR(curl(rot, x), 2.0 * x.x * x.y * (3.0 - 1.0), 1e-13);
    }
}

TEST(MaierStein, OnAxisDriftNormSaddleAndTransverseCurvature) {
    // |F|^2 restricted to the axis is x^2 (1 - x^2)^2, stationary at 1/sqrt(3).
    const double xs = 1.0 / std::sqrt(3.0);
    for (double a : {1.0, 3.0, 4.0, 5.0}) {
        models::MaierStein ms{a};
        const double h = 1e-5;
        const double d1 = (drift_norm2(ms, {xs + h, 0.0}) - drift_norm2(ms, {xs - h, 0.0})) / (2 * h);
        EXPECT_NEAR(d1, 0.0, 1e-9);
        const double d2y = (drift_norm2(ms, {xs, h}) - 2.0 * drift_norm2(ms, {xs, 0.0}) +
                            drift_norm2(ms, {xs, -h})) /
                           (h * h);
        // Transverse curvature (32 - 8 a) / 9 changes sign at a = 4.
        EXPECT_NEAR(d2y, (32.0 - 8.0 * a) / 9.0, 1e-5);
    }
}

TEST(DoubleWell, GradientOfPotentialAndBarrier) {
    models::DoubleWell dw;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec2 x{u(rng), u(rng)};
        const double h = 1e-6;
        const Vec2 F = dw.drift(x);
        EXPECT_NEAR(F.x, -(dw.potential({x.x + h, x.y}) - dw.potential({x.x - h, x.y})) / (2 * h), 1e-8);
        EXPECT_NEAR(F.y, -(dw.potential({x.x, x.y + h}) - dw.potential({x.x, x.y - h})) / (2 * h), 1e-8);
        const Mat2 ja = dw.drift_jacobian(x);
        const Mat2 jf = drift_jacobian_fd(dw, x);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                EXPECT_NEAR(ja.m[i][j], jf.m[i][j], 1e-8);
    }
    EXPECT_NEAR(dw.potential({0.0, 0.0}) - dw.potential({1.0, 0.0}), 0.25, 1e-15);
}
