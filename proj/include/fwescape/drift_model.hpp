#pragma once

#include <concepts>

#include "fwescape/vec.hpp"

namespace fwescape {

/// Diagonal mobility metric at a point.  g2[i] is the squared amplitude
/// multiplying the i-th noise channel; dg2.m[i][j] = d(g2[i])/dx_j.
struct Metric2 {
    Vec2 g2{1.0, 1.0};
    Mat2 dg2{};

    static Metric2 flat() { return {}; }
};

/// Raw drift together with its index-lowered companion f_i = F_i / g2_i.
struct DriftPair {
    Vec2 F;
    Vec2 f;
};

inline DriftPair lower(Vec2 F, const Metric2& g) {
    return {F, {F.x / g.g2.x, F.y / g.g2.y}};
}

/// |v|^2 in the metric with diagonal g2 (raised-index, "energy" norm):
/// used for lowered drifts, |f|_G^2 = sum_i g2_i f_i^2 = sum_i F_i^2 / g2_i.
inline double norm2_lowered(Vec2 f, const Metric2& g) {
    return g.g2.x * f.x * f.x + g.g2.y * f.y * f.y;
}

/// |v|^2 in the inverse metric (for velocities): sum_i v_i^2 / g2_i.
inline double norm2_velocity(Vec2 v, const Metric2& g) {
    return v.x * v.x / g.g2.x + v.y * v.y / g.g2.y;
}

/// A planar drift field with a diagonal mobility metric.  Models provide the
/// raw (contravariant) drift; lowering by the metric happens at use sites.
template <typename M>
concept DriftModel2D = requires(const M m, Vec2 x) {
    { m.drift(x) } -> std::convertible_to<Vec2>;
    { m.metric(x) } -> std::convertible_to<Metric2>;
};

/// Central-difference Jacobian of the raw drift, dF_i/dx_j.
template <DriftModel2D M>
Mat2 drift_jacobian_fd(const M& model, Vec2 x) {
    Mat2 j;
    for (int col = 0; col < 2; ++col) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[col]));
        Vec2 xp = x, xm = x;
        xp[col] += h;
        xm[col] -= h;
        const Vec2 fp = model.drift(xp);
        const Vec2 fm = model.drift(xm);
        j.m[0][col] = (fp.x - fm.x) / (2.0 * h);
        j.m[1][col] = (fp.y - fm.y) / (2.0 * h);
    }
    return j;
}

template <typename M>
concept HasDriftJacobian = requires(const M m, Vec2 x) {
    { m.drift_jacobian(x) } -> std::convertible_to<Mat2>;
};

/// Analytic Jacobian when the model provides one, central differences otherwise.
template <DriftModel2D M>
Mat2 drift_jacobian(const M& model, Vec2 x) {
    if constexpr (HasDriftJacobian<M>)
        return model.drift_jacobian(x);
    else
        return drift_jacobian_fd(model, x);
}

template <typename M>
concept HasMetricDerivative = requires(const M m, Vec2 x) {
    { m.metric(x).dg2 } -> std::convertible_to<Mat2>;
};

}  // namespace fwescape
