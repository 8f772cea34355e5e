#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fwescape/fw.hpp"
#include "fwescape/models/maier_stein.hpp"
#include "fwescape/vec.hpp"

using namespace fwescape;

namespace {

// Non-gradient drift with a position-dependent diagonal mobility; exercises
// the metric terms everywhere and the finite-difference Jacobian fallback.
struct ToyCurvedModel {
    Vec2 drift(Vec2 x) const { return {x.y - 0.3 * x.x + 0.2, -0.7 * x.x + 0.1 * x.y * x.y}; }

    Metric2 metric(Vec2 x) const {
        Metric2 g;
        g.g2 = {1.0 + x.x * x.x, 2.0 + 0.5 * x.y * x.y};
        g.dg2.m[0][0] = 2.0 * x.x;
        g.dg2.m[1][1] = 1.0 * x.y;
        return g;
    }
};

}  // namespace

TEST(Lagrangian, TimeReversedVelocityCostsFourTimesHalfDriftNormSquared) {
    models::MaierStein ms{3.0};
    const Vec2 x{0.5, 0.0};
    const Vec2 F = ms.drift(x);
    EXPECT_NEAR(F.x, 0.375, 1e-15);
    EXPECT_NEAR(F.y, 0.0, 1e-15);
    // v = -F gives L = 1/2 |2F|^2 = 2 |F|^2.
    EXPECT_NEAR(fw_lagrangian(ms, x, -F), 0.28125, 1e-15);
    // Downhill motion is free.
    EXPECT_NEAR(fw_lagrangian(ms, x, F), 0.0, 1e-15);
    EXPECT_NEAR(drift_norm2(ms, x), 0.140625, 1e-15);
}

TEST(Hamiltonian, VanishesAtZeroMomentumAndDrivesRelaxation) {
    models::MaierStein ms{3.0};
    const Vec2 x{0.37, -0.21};
    EXPECT_DOUBLE_EQ(fw_hamiltonian(ms, x, {0.0, 0.0}), 0.0);
    const auto rhs = hamiltonian_rhs(ms, x, {0.0, 0.0});
    const Vec2 F = ms.drift(x);
    EXPECT_NEAR(rhs.xdot.x, F.x, 1e-14);
    EXPECT_NEAR(rhs.xdot.y, F.y, 1e-14);
    EXPECT_NEAR(norm(rhs.pdot), 0.0, 1e-14);
}

TEST(Hamiltonian, DetailedBalanceMomentumReversesDrift) {
    models::MaierStein ms{3.0};
    const Vec2 x{0.5, 0.0};
    const Vec2 f = lower(ms.drift(x), ms.metric(x)).f;
    const Vec2 p = -2.0 * f;
    EXPECT_NEAR(fw_hamiltonian(ms, x, p), 0.0, 1e-15);
    const auto rhs = hamiltonian_rhs(ms, x, p);
    EXPECT_NEAR(rhs.xdot.x, -0.375, 1e-15);
    EXPECT_NEAR(rhs.xdot.y, 0.0, 1e-15);
}

TEST(Hamiltonian, RhsMatchesCentralDifferencesOfH) {
    ToyCurvedModel toy;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec2 x{u(rng), u(rng)};
        const Vec2 p{u(rng), u(rng)};
        const auto rhs = hamiltonian_rhs(toy, x, p);
        const double h = 1e-6;
        for (int k = 0; k < 2; ++k) {
            Vec2 xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            const double dHdx = (fw_hamiltonian(toy, xp, p) - fw_hamiltonian(toy, xm, p)) / (2 * h);
            EXPECT_NEAR(rhs.pdot[k], -dHdx, 1e-7);
            Vec2 pp = p, pm = p;
            pp[k] += h;
            pm[k] -= h;
            const double dHdp = (fw_hamiltonian(toy, x, pp) - fw_hamiltonian(toy, x, pm)) / (2 * h);
            EXPECT_NEAR(rhs.xdot[k], dHdp, 1e-7);
        }
    }
}

TEST(MomentumEllipse, ZeroEnergyEverywhereWithCurvedMetric) {
    ToyCurvedModel toy;
    const Vec2 x{0.4, -0.6};
    const double scale = std::max(1.0, drift_norm2(toy, x));
    for (int k = 0; k < 64; ++k) {
        const double gamma = 2.0 * M_PI * k / 64.0;
        const Vec2 p = momentum_on_ellipse(toy, x, gamma);
        EXPECT_NEAR(fw_hamiltonian(toy, x, p), 0.0, 1e-13 * scale);
    }
}

TEST(MomentumEllipse, AnchorAnglesGiveRestAndReversal) {
    ToyCurvedModel toy;
    const Vec2 x{0.4, -0.6};
    const Metric2 g = toy.metric(x);
    const Vec2 f = lower(toy.drift(x), g).f;
    const double g0 = gamma0(toy, x);
    const Vec2 p_rest = momentum_on_ellipse(toy, x, g0);
    EXPECT_NEAR(norm(p_rest), 0.0, 1e-14);
    const Vec2 p_rev = momentum_on_ellipse(toy, x, g0 + M_PI);
    EXPECT_NEAR(p_rev.x, -2.0 * f.x, 1e-14);
    EXPECT_NEAR(p_rev.y, -2.0 * f.y, 1e-14);
}

TEST(MomentumEllipse, InducedVelocityMatchesParametrisationAndInverts) {
    ToyCurvedModel toy;
    const Vec2 x{0.4, -0.6};
    const Metric2 g = toy.metric(x);
    const double fn = std::sqrt(drift_norm2(toy, x));
    for (int k = 1; k < 16; ++k) {
        const double gamma = 2.0 * M_PI * k / 16.0 - M_PI;
        const Vec2 p = momentum_on_ellipse(toy, x, gamma);
        const Vec2 v = hamiltonian_rhs(toy, x, p).xdot;
        EXPECT_NEAR(v.x, std::sqrt(g.g2.x) * fn * std::cos(gamma), 1e-13);
        EXPECT_NEAR(v.y, std::sqrt(g.g2.y) * fn * std::sin(gamma), 1e-13);
        EXPECT_NEAR(gamma_of_velocity(v, g), gamma, 1e-12);
        // Speed identity on the zero-energy shell.
        EXPECT_NEAR(std::sqrt(norm2_velocity(v, g)), fn, 1e-13);
    }
}

TEST(MomentumEllipse, LagrangianEqualsDriftNormSquaredTimesOneMinusCosPsi) {
    ToyCurvedModel toy;
    const Vec2 x{0.4, -0.6};
    const double fn2 = drift_norm2(toy, x);
    for (int k = 0; k < 32; ++k) {
        const double gamma = 2.0 * M_PI * k / 32.0;
        const Vec2 p = momentum_on_ellipse(toy, x, gamma);
        const Vec2 v = hamiltonian_rhs(toy, x, p).xdot;
        const double psi = psi_of_velocity(toy, x, v);
        EXPECT_NEAR(fw_lagrangian(toy, x, v), fn2 * (1.0 - std::cos(psi)), 1e-12);
    }
}

TEST(MomentumEllipse, RadialProjectionRestoresZeroEnergy) {
    ToyCurvedModel toy;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec2 x{u(rng), u(rng)};
        Vec2 p{u(rng), u(rng)};
        ASSERT_TRUE(project_zero_energy(toy, x, p));
        EXPECT_NEAR(fw_hamiltonian(toy, x, p), 0.0, 1e-13 * std::max(1.0, drift_norm2(toy, x)));
    }
}

TEST(Eigen2, RealSpectrumOfSaddleJacobian) {
    Mat2 a{{{1.0, 0.0}, {0.0, -1.0}}};
    const Eig2 e = eigen2(a);
    EXPECT_NEAR(e.lambda[0].real(), 1.0, 1e-14);
    EXPECT_NEAR(e.lambda[1].real(), -1.0, 1e-14);
    EXPECT_NEAR(e.lambda[0].imag(), 0.0, 1e-14);
}

TEST(Eigen2, ComplexPairAndResidual) {
    Mat2 a{{{0.3, -2.0}, {1.5, 0.1}}};
    const Eig2 e = eigen2(a);
    EXPECT_GT(std::abs(e.lambda[0].imag()), 1.0);
    for (int k = 0; k < 2; ++k) {
        // || A v - lambda v || should vanish.
        const std::complex<double> vx = e.vec[0][k], vy = e.vec[1][k];
        const std::complex<double> r0 = a.m[0][0] * vx + a.m[0][1] * vy - e.lambda[k] * vx;
        const std::complex<double> r1 = a.m[1][0] * vx + a.m[1][1] * vy - e.lambda[k] * vy;
        EXPECT_LT(std::abs(r0) + std::abs(r1), 1e-13);
    }
}

TEST(Eigen2, NearScalarMatrixFlagged) {
    Mat2 a{{{-2.0, 0.0}, {0.0, -2.0}}};
    const Eig2 e = eigen2(a);
    EXPECT_TRUE(e.near_scalar);
    EXPECT_NEAR(e.lambda[0].real(), -2.0, 1e-14);
}

TEST(EigenSym2, ClassifiesDefiniteAndIndefinite) {
    Mat2 hess{{{2.0, 0.5}, {0.5, -1.0}}};
    const SymEig2 e = eigen_sym2(hess);
    EXPECT_GT(e.lambda[0], 0.0);
    EXPECT_LT(e.lambda[1], 0.0);
    for (int k = 0; k < 2; ++k) {
        const Vec2 v = e.vec[k];
        const Vec2 hv = apply(hess, v);
        EXPECT_NEAR(hv.x, e.lambda[k] * v.x, 1e-13);
        EXPECT_NEAR(hv.y, e.lambda[k] * v.y, 1e-13);
    }
}
