#pragma once

#include "fwescape/drift_model.hpp"

namespace fwescape::models {

/// Planar bistable flow F = (x(1 - x^2 - a y^2), -y(1 + x^2)) with unit
/// mobility.  Stable points at (+-1, 0), saddle at the origin.  The field is
/// a gradient only at a = 1; the curl is 2xy(a - 1).
struct MaierStein {
    double a = 1.0;

    Vec2 drift(Vec2 x) const {
        return {x.x * (1.0 - x.x * x.x - a * x.y * x.y), -x.y * (1.0 + x.x * x.x)};
    }

    Mat2 drift_jacobian(Vec2 x) const {
        Mat2 j;
        j.m[0][0] = 1.0 - 3.0 * x.x * x.x - a * x.y * x.y;
        j.m[0][1] = -2.0 * a * x.x * x.y;
        j.m[1][0] = -2.0 * x.x * x.y;
        j.m[1][1] = -(1.0 + x.x * x.x);
        return j;
    }

    Metric2 metric(Vec2) const { return Metric2::flat(); }
};

}  // namespace fwescape::models
