#pragma once

#include "fwescape/drift_model.hpp"

namespace fwescape::models {

/// Gradient flow of V(x, y) = (1 - x^2)^2 / 4 + y^2 / 2 with unit mobility.
/// Minima at (+-1, 0), saddle at the origin with barrier 1/4; the uphill
/// action between a minimum and the saddle is exactly 2 * 1/4 = 1/2.
struct DoubleWell {
    Vec2 drift(Vec2 x) const { return {x.x * (1.0 - x.x * x.x), -x.y}; }

    Mat2 drift_jacobian(Vec2 x) const {
        Mat2 j;
        j.m[0][0] = 1.0 - 3.0 * x.x * x.x;
        j.m[1][1] = -1.0;
        return j;
    }

    Metric2 metric(Vec2) const { return Metric2::flat(); }

    double potential(Vec2 x) const {
        const double u = 1.0 - x.x * x.x;
        return 0.25 * u * u + 0.5 * x.y * x.y;
    }
};

}  // namespace fwescape::models
