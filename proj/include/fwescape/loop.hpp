#pragma once

#include <cmath>

#include "fwescape/drift_model.hpp"
#include "fwescape/fw.hpp"

namespace fwescape {

/// Closed-loop action split into its geometric (speed-times-arc) and
/// circulation (flux) parts:
///   S_loop = oint |f|_G ds  -  oint f . dx
/// `total_alt` re-evaluates the same action through the Lagrangian with the
/// loop traversed at the natural speed |xdot|_{G^-1} = |f|_G; the two routes
/// agree identically in exact arithmetic.
struct LoopDecomposition {
    double geometric = 0.0;
    double flux = 0.0;
    double total = 0.0;
    double total_alt = 0.0;
};

/// `loop(tau)` for tau in [0, 2 pi) returns the point and its tau-derivative.
/// Periodic trapezoid sampling; spectrally accurate for smooth loops.
template <DriftModel2D M, typename Loop>
LoopDecomposition loop_decomposition(const M& model, Loop&& loop, int n_samples = 512) {
    LoopDecomposition d;
    const double dtau = 2.0 * M_PI / n_samples;
    for (int k = 0; k < n_samples; ++k) {
        const double tau = k * dtau;
        const auto [x, xp] = loop(tau);
        const Metric2 g = model.metric(x);
        const Vec2 f = lower(model.drift(x), g).f;
        const double fn = std::sqrt(norm2_lowered(f, g));
        const double speed = std::sqrt(norm2_velocity(xp, g));
        d.geometric += fn * speed * dtau;
        d.flux += dot(f, xp) * dtau;
        if (speed > 0.0 && fn > 0.0) {
            // Traverse at the natural speed: v = |f|_G * xp / |xp|_{G^-1},
            // physical time element dt = |xp|_{G^-1} dtau / |f|_G.
            const Vec2 v = (fn / speed) * xp;
            d.total_alt += fw_lagrangian(model, x, v) * (speed / fn) * dtau;
        }
    }
    d.total = d.geometric - d.flux;
    return d;
}

}  // namespace fwescape
