#pragma once

#include <algorithm>
#include <cmath>

#include "fwescape/drift_model.hpp"
#include "fwescape/vec.hpp"

namespace fwescape {

/// Path-space cost rate for velocity v against drift F under a diagonal
/// mobility metric: L = 1/2 |v - F|^2 measured in the inverse metric.
template <DriftModel2D M>
double fw_lagrangian(const M& model, Vec2 x, Vec2 v) {
    const Metric2 g = model.metric(x);
    const Vec2 F = model.drift(x);
    const Vec2 r = v - F;
    return 0.5 * norm2_velocity(r, g);
}

/// Wentzell Hamiltonian H(x,p) = 1/2 sum_i g2_i p_i^2 + p . F.
template <DriftModel2D M>
double fw_hamiltonian(const M& model, Vec2 x, Vec2 p) {
    const Metric2 g = model.metric(x);
    const Vec2 F = model.drift(x);
    return 0.5 * (g.g2.x * p.x * p.x + g.g2.y * p.y * p.y) + dot(p, F);
}

struct HamiltonianRhs {
    Vec2 xdot;
    Vec2 pdot;
};

/// Hamilton's equations: xdot_i = g2_i p_i + F_i,
/// pdot_k = -1/2 sum_i (dg2_i/dx_k) p_i^2 - sum_i p_i dF_i/dx_k.
template <DriftModel2D M>
HamiltonianRhs hamiltonian_rhs(const M& model, Vec2 x, Vec2 p) {
    const Metric2 g = model.metric(x);
    const Vec2 F = model.drift(x);
    const Mat2 J = drift_jacobian(model, x);
    HamiltonianRhs r;
    r.xdot = {g.g2.x * p.x + F.x, g.g2.y * p.y + F.y};
    for (int k = 0; k < 2; ++k) {
        double s = 0.0;
        for (int i = 0; i < 2; ++i) {
            s += 0.5 * g.dg2.m[i][k] * p[i] * p[i];
            s += p[i] * J.m[i][k];
        }
        r.pdot[k] = -s;
    }
    return r;
}

/// Squared drift norm |f|_G^2 = sum_i F_i^2 / g2_i at x.
template <DriftModel2D M>
double drift_norm2(const M& model, Vec2 x) {
    return norm2_velocity(model.drift(x), model.metric(x));
}

/// Angle marking the zero-momentum point of the momentum ellipse;
/// p(gamma0) = 0 and p(gamma0 + pi) = -2f.
inline double gamma0(Vec2 f, const Metric2& g) {
    return std::atan2(std::sqrt(g.g2.y) * f.y, std::sqrt(g.g2.x) * f.x);
}

template <DriftModel2D M>
double gamma0(const M& model, Vec2 x) {
    const Metric2 g = model.metric(x);
    return gamma0(lower(model.drift(x), g).f, g);
}

/// The zero-energy momenta at x form an ellipse,
///   p_i(gamma) = (|f|_G / g_i) c_i(gamma) - f_i,  c = (cos, sin),
/// on which H(x, p(gamma)) == 0 identically.
template <DriftModel2D M>
Vec2 momentum_on_ellipse(const M& model, Vec2 x, double gamma) {
    const Metric2 g = model.metric(x);
    const Vec2 f = lower(model.drift(x), g).f;
    const double fn = std::sqrt(norm2_lowered(f, g));
    const double gx = std::sqrt(g.g2.x);
    const double gy = std::sqrt(g.g2.y);
    return {fn * std::cos(gamma) / gx - f.x, fn * std::sin(gamma) / gy - f.y};
}

/// Inverse of the ellipse parametrisation through the induced velocity
/// xdot = (g_x |f| cos gamma, g_y |f| sin gamma).
inline double gamma_of_velocity(Vec2 v, const Metric2& g) {
    return std::atan2(v.y / std::sqrt(g.g2.y), v.x / std::sqrt(g.g2.x));
}

/// Angle between the instantaneous velocity and the drift on the zero-energy
/// shell: cos psi = (v . f) / |f|_G^2.  Clamped against round-off.
template <DriftModel2D M>
double psi_of_velocity(const M& model, Vec2 x, Vec2 v) {
    const Metric2 g = model.metric(x);
    const Vec2 f = lower(model.drift(x), g).f;
    const double fn2 = norm2_lowered(f, g);
    if (fn2 <= 0.0)
        return 0.0;
    return std::acos(std::clamp(dot(v, f) / fn2, -1.0, 1.0));
}

/// Rescale a trial momentum onto the zero-energy shell at x.  The shifted
/// momentum q = p + f is radially projected onto the ellipse |q|_G = |f|_G.
/// Returns false when q vanishes (no direction to project along).
template <DriftModel2D M>
bool project_zero_energy(const M& model, Vec2 x, Vec2& p) {
    const Metric2 g = model.metric(x);
    const Vec2 f = lower(model.drift(x), g).f;
    const Vec2 q = p + f;
    const double qn = std::sqrt(norm2_lowered(q, g));
    const double fn = std::sqrt(norm2_lowered(f, g));
    if (qn <= 1e-300 * std::max(fn, 1.0))
        return false;
    p = (fn / qn) * q - f;
    return true;
}

}  // namespace fwescape
