#pragma once

#include <cstddef>
#include <vector>

#include "fwescape/fw.hpp"
#include "fwescape/vec.hpp"

namespace fwescape {

/// One recorded sample of a shot trajectory: phase point, clocks and
/// per-point diagnostics.  `m` is the sphere embedding for spherical charts.
struct TrajectoryPoint {
    double t = 0.0;   // fictitious path time
    double s = 0.0;   // physical arc length traveled
    double S = 0.0;   // accumulated action
    Vec2 x{};
    Vec2 p{};
    double h_resid = 0.0;  // H(x, p), should stay ~0 on an instanton
    double psi = 0.0;      // angle between velocity and drift
    double gamma = 0.0;    // ellipse parameter of the velocity direction
    Vec3 m{};   // sphere embedding of x for spherical charts
    Vec3 pm{};  // raised momentum tangent vector at m
    bool has_m = false;
};

enum class StopReason {
    none,
    reached_time,     // integrated to max_time without triggering a stop set
    fixed_point,      // entered the target fixed-point ball
    separatrix,       // crossed the zero-energy set / basin boundary
    pole,             // approached a chart singularity
    domain_exit,      // left the configured bounding box
    max_arc_length,   // physical arc budget exhausted
    energy_violation, // |H| residual exceeded its guard
    step_failure,
    step_budget,
};

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::none: return "none";
        case StopReason::reached_time: return "reached_time";
        case StopReason::fixed_point: return "fixed_point";
        case StopReason::separatrix: return "separatrix";
        case StopReason::pole: return "pole";
        case StopReason::domain_exit: return "domain_exit";
        case StopReason::max_arc_length: return "max_arc_length";
        case StopReason::energy_violation: return "energy_violation";
        case StopReason::step_failure: return "step_failure";
        case StopReason::step_budget: return "step_budget";
    }
    return "unknown";
}

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    StopReason stop = StopReason::none;
    std::size_t n_accepted = 0;
    std::size_t n_rejected = 0;

    bool empty() const { return points.empty(); }
    const TrajectoryPoint& back() const { return points.back(); }

    /// Accumulated action carried by the augmented ODE state.
    double final_action() const { return points.empty() ? 0.0 : points.back().S; }

    double final_time() const { return points.empty() ? 0.0 : points.back().t; }
    double arc_length() const { return points.empty() ? 0.0 : points.back().s; }

    /// Worst zero-energy violation along the path.
    double max_h_resid() const {
        double w = 0.0;
        for (const auto& q : points)
            w = std::max(w, std::abs(q.h_resid));
        return w;
    }
};

/// Trapezoidal quadrature of the canonical one-form p . dx over the stored
/// points.  On a zero-energy trajectory this is the accumulated action; the
/// recorder controls point density so that it agrees with the integrated S.
inline double accumulate_action(const Trajectory& traj) {
    double S = 0.0;
    for (std::size_t k = 1; k < traj.points.size(); ++k) {
        const auto& a = traj.points[k - 1];
        const auto& b = traj.points[k];
        S += 0.5 * dot(a.p + b.p, b.x - a.x);
    }
    return S;
}

}  // namespace fwescape
