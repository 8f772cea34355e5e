#pragma once

#include <algorithm>
#include <cmath>

#include "fwescape/drift_model.hpp"
#include "fwescape/vec.hpp"

namespace fwescape::models {

/// Single-domain magnet with easy axis z, hard axis x (anisotropy ratio D),
/// Gilbert damping alpha, and spin-transfer torque of strength I from a
/// polarizer tilted by omega from +z in the x-z plane.  Negative I
/// destabilises the m_z > 0 well.
struct MacrospinParams {
    double alpha = 0.01;
    double D = 0.0;
    double I = 0.0;
    double omega = 0.0;
};

/// Cartesian dynamics on the unit sphere:
///   A(m) = m x h - alpha m x (m x h) - alpha I m x (m x n)
/// with anisotropy field h = (-D m_x, 0, m_z) and polarizer
/// n = (sin omega, 0, cos omega).
struct Macrospin {
    MacrospinParams prm;

    Vec3 polarizer() const { return {std::sin(prm.omega), 0.0, std::cos(prm.omega)}; }

    Vec3 field(Vec3 m) const { return {-prm.D * m.x, 0.0, m.z}; }

    Vec3 dynamics(Vec3 m) const {
        const Vec3 h = field(m);
        const Vec3 mxh = cross(m, h);
        const Vec3 n = polarizer();
        return mxh - prm.alpha * cross(m, mxh) - prm.alpha * prm.I * cross(m, cross(m, n));
    }

    /// Unconstrained derivative of the dynamics formula (valid off the
    /// sphere as well, so it can be checked by plain finite differences).
    Mat3 dynamics_jacobian(Vec3 m) const {
        const Vec3 h = field(m);
        const Vec3 n = polarizer();
        const double a = prm.alpha;
        const double mh = dot(m, h);
        const double mn = dot(m, n);
        const double mm = dot(m, m);
        const double hd[3] = {-prm.D, 0.0, 1.0};  // dh_i/dm_i, diagonal
        const Mat3 hx = cross_mat(h);
        const Mat3 mx = cross_mat(m);
        const Mat3 mhx = cross_mat(cross(m, h));
        const Mat3 mnx = cross_mat(cross(m, n));
        Mat3 j;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                const double d = r == c ? 1.0 : 0.0;
                double v = -hx.m[r][c] + mx.m[r][c] * hd[c];
                v -= a * (-mhx.m[r][c] + mh * d - h[r] * m[c] + hd[c] * (m[c] * m[r] - mm * d));
                v -= a * prm.I * (-mnx.m[r][c] + mn * d - n[r] * m[c]);
                j.m[r][c] = v;
            }
        }
        return j;
    }

    /// Anisotropy energy e(m) = D m_x^2 - m_z^2, in [-1, D] on the sphere;
    /// the separatrix between the two easy wells sits at e = 0 and
    /// h = -grad(e)/2.
    double energy(Vec3 m) const { return prm.D * m.x * m.x - m.z * m.z; }

    /// Exact dissipation law de/dt = -2 alpha (m x h) . [m x (h + I n)].
    double energy_rate(Vec3 m) const {
        const Vec3 mxh = cross(m, field(m));
        const Vec3 w = field(m) + prm.I * polarizer();
        return -2.0 * prm.alpha * dot(mxh, cross(m, w));
    }
};

/// Destabilising current threshold of the m_z = 1 equilibrium for an
/// untilted polarizer; the two branches exchange roles near D = 5.09.
inline constexpr double kMacrospinBranchCrossD = 5.09;

inline double critical_current(double D) {
    if (D < kMacrospinBranchCrossD)
        return 0.5 * (D + 2.0);
    return (2.0 / M_PI) * std::sqrt(D * (D + 1.0));
}

inline double critical_current(double D, double omega) {
    return critical_current(D) / std::cos(omega);
}

/// Polar angle of the energy separatrix on the m_y = 0 great circle,
/// theta_C = atan(1/sqrt(D)); pi/2 in the uniaxial limit.
inline double critical_angle(double D) {
    return D > 0.0 ? std::atan(1.0 / std::sqrt(D)) : M_PI / 2.0;
}

/// Energy-sign regions of the biaxial sphere.  Negative-energy caps surround
/// the easy poles m_z = +-1, positive-energy lobes the hard poles m_x = +-1;
/// the separatrix cone e = 0 divides them.
enum class SphereRegion {
    neg_energy_up,
    neg_energy_down,
    pos_energy_xplus,
    pos_energy_xminus,
    separatrix,
};

inline SphereRegion classify_region(Vec3 m, double D, double tol = 1e-9) {
    const double e = D * m.x * m.x - m.z * m.z;
    if (std::abs(e) <= tol)
        return SphereRegion::separatrix;
    if (e < 0.0)
        return m.z > 0.0 ? SphereRegion::neg_energy_up : SphereRegion::neg_energy_down;
    return m.x > 0.0 ? SphereRegion::pos_energy_xplus : SphereRegion::pos_energy_xminus;
}

/// Orthonormal frame (a1, a2, a3) defining spherical coordinates
/// m = sin(t) cos(p) a1 + sin(t) sin(p) a2 + cos(t) a3.
struct SphericalChart {
    Vec3 a1{1.0, 0.0, 0.0};
    Vec3 a2{0.0, 1.0, 0.0};
    Vec3 a3{0.0, 0.0, 1.0};

    static SphericalChart z_pole() { return {}; }

    /// Pole along +x; keeps trajectories that wind about the hard axis away
    /// from coordinate singularities.
    static SphericalChart x_pole() {
        return {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
    }

    Vec3 embed(Vec2 x) const {
        const double st = std::sin(x.x), ct = std::cos(x.x);
        const double sp = std::sin(x.y), cp = std::cos(x.y);
        return st * cp * a1 + st * sp * a2 + ct * a3;
    }

    Vec3 e_theta(Vec2 x) const {
        const double st = std::sin(x.x), ct = std::cos(x.x);
        const double sp = std::sin(x.y), cp = std::cos(x.y);
        return ct * cp * a1 + ct * sp * a2 - st * a3;
    }

    Vec3 e_phi(Vec2 x) const {
        const double sp = std::sin(x.y), cp = std::cos(x.y);
        return -sp * a1 + cp * a2;
    }

    Vec2 coords(Vec3 m) const {
        const double c = std::clamp(dot(m, a3), -1.0, 1.0);
        return {std::acos(c), std::atan2(dot(m, a2), dot(m, a1))};
    }
};

/// Planar chart of the macrospin flow: x = (theta, phi), contravariant drift
/// (theta_dot, phi_dot), diagonal mobility metric diag(1, 1/sin^2 theta).
struct MacrospinChart {
    Macrospin spin;
    SphericalChart chart;

    /// The chart degenerates at its poles; the metric blows up there.
    bool in_domain(Vec2 x) const { return x.x > 0.0 && x.x < M_PI; }

    Vec2 drift(Vec2 x) const {
        const Vec3 m = chart.embed(x);
        const Vec3 A = spin.dynamics(m);
        const double st = std::sin(x.x);
        return {dot(A, chart.e_theta(x)), dot(A, chart.e_phi(x)) / st};
    }

    Mat2 drift_jacobian(Vec2 x) const {
        const Vec3 m = chart.embed(x);
        const Vec3 et = chart.e_theta(x);
        const Vec3 ep = chart.e_phi(x);
        const Vec3 A = spin.dynamics(m);
        const Mat3 JA = spin.dynamics_jacobian(m);
        const double st = std::sin(x.x), ct = std::cos(x.x);
        const Vec3 JAt = apply(JA, et);
        const Vec3 JAp = apply(JA, ep);
        const double Ft = dot(A, et);
        const double Fp = dot(A, ep) / st;
        Mat2 j;
        j.m[0][0] = dot(et, JAt);
        j.m[0][1] = st * dot(et, JAp) + ct * dot(A, ep);
        j.m[1][0] = dot(ep, JAt) / st - Fp * ct / st;
        j.m[1][1] = dot(ep, JAp) - Ft * ct / st;
        return j;
    }

    Metric2 metric(Vec2 x) const {
        const double st = std::sin(x.x);
        Metric2 g;
        g.g2 = {1.0, 1.0 / (st * st)};
        g.dg2.m[1][0] = -2.0 * std::cos(x.x) / (st * st * st);
        return g;
    }

    /// Cartesian tangent vector of a contravariant chart velocity.
    Vec3 velocity3(Vec2 x, Vec2 v) const {
        return v.x * chart.e_theta(x) + v.y * std::sin(x.x) * chart.e_phi(x);
    }

    /// Cartesian tangent vector of a covariant chart momentum (index raised
    /// by the inverse metric); chart-independent up to the embedding.
    Vec3 raise_momentum3(Vec2 x, Vec2 p) const {
        return p.x * chart.e_theta(x) + (p.y / std::sin(x.x)) * chart.e_phi(x);
    }
};

}  // namespace fwescape::models
