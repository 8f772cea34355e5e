#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "fwescape/drift_model.hpp"
#include "fwescape/fw.hpp"
#include "fwescape/ode.hpp"
#include "fwescape/trajectory.hpp"
#include "fwescape/vec.hpp"

namespace fwescape {

/// Newton refinement of a zero of the drift from a nearby guess.  Returns
/// nothing when the Jacobian degenerates or |F| fails to reach tol.
template <DriftModel2D M>
std::optional<Vec2> find_fixed_point(const M& model, Vec2 guess,
                                     double tol = 1e-12, int max_iter = 50) {
    Vec2 x = guess;
    for (int it = 0; it < max_iter; ++it) {
        const Vec2 F = model.drift(x);
        if (norm(F) <= tol)
            return x;
        const Mat2 J = drift_jacobian(model, x);
        const double d = det(J);
        if (std::abs(d) < 1e-300)
            return std::nullopt;
        x = x - Vec2{(J.m[1][1] * F.x - J.m[0][1] * F.y) / d,
                     (-J.m[1][0] * F.x + J.m[0][0] * F.y) / d};
    }
    return norm(model.drift(x)) <= tol ? std::optional<Vec2>(x) : std::nullopt;
}

/// Eigenstructure of the linearized Hamiltonian flow at a hyperbolic fixed
/// point (x*, p = 0).  The 4x4 flow matrix is block triangular,
///   [[A, G], [0, -A^T]],  A = dF/dx(x*),  G = diag(g2),
/// so its spectrum is {lambda(A)} u {-lambda(A)}.  For a stable point the
/// escaping subspace is spanned by modes (u_k, w_k) with growth mu_k =
/// -lambda_k:  A^T w = lambda w and u = -(A - mu I)^{-1} G w.
struct FixedPointModes {
    Vec2 x{};
    Mat2 A{};
    std::complex<double> lambda[2];
    bool complex_pair = false;
    bool near_scalar = false;  // A ~ c I: any momentum direction is a mode
    bool defective = false;    // repeated eigenvalue without a full basis
    // Real basis of the escaping plane; for a complex pair these are the
    // real and imaginary parts of the single complex mode.
    Vec2 u[2]{};
    Vec2 w[2]{};
};

template <DriftModel2D M>
FixedPointModes linearize_fixed_point(const M& model, Vec2 x_star) {
    FixedPointModes fp;
    fp.x = x_star;
    fp.A = drift_jacobian(model, x_star);
    const Metric2 g = model.metric(x_star);

    const Mat2 At{{{fp.A.m[0][0], fp.A.m[1][0]}, {fp.A.m[0][1], fp.A.m[1][1]}}};
    const Eig2 e = eigen2(At);
    fp.lambda[0] = e.lambda[0];
    fp.lambda[1] = e.lambda[1];
    fp.near_scalar = e.near_scalar;
    fp.complex_pair = std::abs(e.lambda[0].imag()) >
                      1e-12 * (1.0 + std::abs(e.lambda[0].real()));

    if (fp.near_scalar) {
        // w free; pick the coordinate axes.  u solves (A - mu) u = -G w with
        // mu = -c, i.e. u = -G w / (2 c) for A = c I (c < 0 at an attractor).
        const double c = fp.A.m[0][0];
        fp.w[0] = {1.0, 0.0};
        fp.w[1] = {0.0, 1.0};
        fp.u[0] = {-g.g2.x / (2.0 * c), 0.0};
        fp.u[1] = {0.0, -g.g2.y / (2.0 * c)};
        return fp;
    }
    if (!fp.complex_pair && std::abs(e.lambda[0] - e.lambda[1]) <
                                1e-9 * (1.0 + std::abs(e.lambda[0]))) {
        fp.defective = true;
        return fp;
    }

    if (fp.complex_pair) {
        const std::complex<double> wc[2] = {e.vec[0][0], e.vec[1][0]};
        const std::complex<double> mu = -e.lambda[0];
        const std::complex<double> rhs[2] = {-g.g2.x * wc[0], -g.g2.y * wc[1]};
        std::complex<double> uc[2];
        solve_shifted2(fp.A, mu, rhs, uc);
        fp.u[0] = {uc[0].real(), uc[1].real()};
        fp.w[0] = {wc[0].real(), wc[1].real()};
        fp.u[1] = {uc[0].imag(), uc[1].imag()};
        fp.w[1] = {wc[0].imag(), wc[1].imag()};
        return fp;
    }

    for (int k = 0; k < 2; ++k) {
        const std::complex<double> wc[2] = {e.vec[0][k], e.vec[1][k]};
        const std::complex<double> mu = -e.lambda[k];
        const std::complex<double> rhs[2] = {-g.g2.x * wc[0], -g.g2.y * wc[1]};
        std::complex<double> uc[2];
        solve_shifted2(fp.A, mu, rhs, uc);
        fp.u[k] = {uc[0].real(), uc[1].real()};
        fp.w[k] = {wc[0].real(), wc[1].real()};
    }
    return fp;
}

/// Position-triggered stopping condition; fires when `g` crosses zero in the
/// given direction.
struct StopSpec {
    std::function<double(double t, Vec2 x, Vec2 p, double s)> g;
    int direction = 0;
    StopReason reason = StopReason::none;
};

inline StopSpec stop_ball(Vec2 center, double radius,
                          StopReason reason = StopReason::fixed_point) {
    StopSpec s;
    s.g = [=](double, Vec2 x, Vec2, double) { return norm(x - center) - radius; };
    s.direction = -1;
    s.reason = reason;
    return s;
}

inline StopSpec stop_box(Vec2 lo, Vec2 hi, StopReason reason = StopReason::domain_exit) {
    StopSpec s;
    s.g = [=](double, Vec2 x, Vec2, double) {
        const double d = std::min(std::min(x.x - lo.x, hi.x - x.x),
                                  std::min(x.y - lo.y, hi.y - x.y));
        return d;
    };
    s.direction = -1;
    s.reason = reason;
    return s;
}

/// Stop once the first coordinate rises past `value` (uniaxial basin edge).
inline StopSpec stop_coord0_above(double value, StopReason reason = StopReason::separatrix) {
    StopSpec s;
    s.g = [=](double, Vec2 x, Vec2, double) { return x.x - value; };
    s.direction = +1;
    s.reason = reason;
    return s;
}

inline StopSpec stop_coord0_below(double value, StopReason reason = StopReason::separatrix) {
    StopSpec s;
    s.g = [=](double, Vec2 x, Vec2, double) { return x.x - value; };
    s.direction = -1;
    s.reason = reason;
    return s;
}

/// Stop when a scalar field of position rises through zero (e.g. the
/// anisotropy energy plus tolerance on the way to a separatrix).
inline StopSpec stop_field_rises(std::function<double(Vec2)> field,
                                 StopReason reason = StopReason::separatrix) {
    StopSpec s;
    s.g = [f = std::move(field)](double, Vec2 x, Vec2, double) { return f(x); };
    s.direction = +1;
    s.reason = reason;
    return s;
}

/// Polar-chart guard: stop when theta leaves [tol, pi - tol].
inline std::vector<StopSpec> stop_pole_band(double tol) {
    StopSpec lo;
    lo.g = [=](double, Vec2 x, Vec2, double) { return x.x - tol; };
    lo.direction = -1;
    lo.reason = StopReason::pole;
    StopSpec hi;
    hi.g = [=](double, Vec2 x, Vec2, double) { return M_PI - tol - x.x; };
    hi.direction = -1;
    hi.reason = StopReason::pole;
    return {lo, hi};
}

struct ShootingConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_time = 1e4;
    double max_arc_length = 50.0;
    /// |H| guard, relative to max(1, |f|_G^2); exceeding it aborts the shot.
    double h_resid_guard = 1e-8;
    /// Fraction of accumulated-action discrepancy allowed per recorded
    /// segment when densifying output for the trapezoid quadrature.
    double record_action_rtol = 1e-6;
    std::vector<StopSpec> stops;
    std::size_t max_steps = 2'000'000;
};

namespace detail {

template <DriftModel2D M>
void fill_diagnostics(const M& model, TrajectoryPoint& q) {
    const Metric2 g = model.metric(q.x);
    const Vec2 F = model.drift(q.x);
    const Vec2 v{g.g2.x * q.p.x + F.x, g.g2.y * q.p.y + F.y};
    q.h_resid = 0.5 * (g.g2.x * q.p.x * q.p.x + g.g2.y * q.p.y * q.p.y) + dot(q.p, F);
    q.psi = psi_of_velocity(model, q.x, v);
    q.gamma = gamma_of_velocity(v, g);
}

template <typename M>
concept SphereEmbedding = requires(const M m, Vec2 x) {
    { m.chart.embed(x) } -> std::convertible_to<Vec3>;
};

template <DriftModel2D M>
void fill_embedding(const M& model, TrajectoryPoint& q) {
    if constexpr (SphereEmbedding<M>) {
        q.m = model.chart.embed(q.x);
        q.pm = model.raise_momentum3(q.x, q.p);
        q.has_m = true;
    }
}

inline TrajectoryPoint decode_point(double t, const OdeState<6>& y) {
    TrajectoryPoint q;
    q.t = t;
    q.x = {y[0], y[1]};
    q.p = {y[2], y[3]};
    q.S = y[4];
    q.s = y[5];
    return q;
}

// Emit recorded points across one accepted step, subdividing it so the p.dx
// trapezoid over the emitted nodes reproduces the integrated action increment
// within a per-segment budget.  The subdivision count comes from the standard
// composite-trapezoid error bound with the action curvature estimated from
// the dense output.
template <DriftModel2D M>
void record_segment(const M& model, const DenseSegment<6>& seg, double rtol,
                    Trajectory& out) {
    const double H = seg.t1 - seg.t0;
    int n = 1;
    if (H > 0.0) {
        const double Sm = seg.eval(0.5 * (seg.t0 + seg.t1))[4];
        const double curv = 4.0 * std::abs(seg.y0[4] - 2.0 * Sm + seg.y1[4]) / (H * H);
        const double dS = std::abs(seg.y1[4] - seg.y0[4]);
        const double budget =
            std::max(rtol * dS, 1e-12 * std::max(std::abs(seg.y1[4]), 1e-3));
        // H^3 curv / (12 n^2) <= budget
        const double nf = H * std::sqrt(H * curv / (12.0 * budget));
        n = std::clamp(static_cast<int>(std::ceil(nf)), 1, 64);
    }
    for (int k = 1; k <= n; ++k) {
        const double t = k == n ? seg.t1 : seg.t0 + H * k / n;
        TrajectoryPoint q = decode_point(t, k == n ? seg.y1 : seg.eval(t));
        fill_diagnostics(model, q);
        fill_embedding(model, q);
        out.points.push_back(q);
    }
}

}  // namespace detail

/// Integrate the Hamiltonian flow from one phase-space seed until a stop
/// condition fires.  The ODE state is (x, p, S, s) with dS = p . dx and
/// ds the physical arc element.
template <DriftModel2D M>
Trajectory shoot(const M& model, Vec2 x0, Vec2 p0, const ShootingConfig& cfg) {
    Trajectory traj;

    auto rhs = [&](double, const OdeState<6>& y, OdeState<6>& dy) {
        const Vec2 x{y[0], y[1]};
        const Vec2 p{y[2], y[3]};
        const auto r = hamiltonian_rhs(model, x, p);
        dy[0] = r.xdot.x;
        dy[1] = r.xdot.y;
        dy[2] = r.pdot.x;
        dy[3] = r.pdot.y;
        dy[4] = dot(p, r.xdot);
        dy[5] = std::sqrt(norm2_velocity(r.xdot, model.metric(x)));
    };

    OdeOptions opt;
    opt.rel_tol = cfg.rel_tol;
    opt.abs_tol = cfg.abs_tol;
    opt.max_steps = cfg.max_steps;

    std::vector<OdeEvent<6>> events;
    std::vector<StopReason> reasons;
    for (const StopSpec& s : cfg.stops) {
        OdeEvent<6> e;
        e.g = [&s](double t, const OdeState<6>& y) {
            return s.g(t, Vec2{y[0], y[1]}, Vec2{y[2], y[3]}, y[5]);
        };
        e.direction = s.direction;
        events.push_back(std::move(e));
        reasons.push_back(s.reason);
    }
    {
        OdeEvent<6> arc;
        arc.g = [&cfg](double, const OdeState<6>& y) { return y[5] - cfg.max_arc_length; };
        arc.direction = +1;
        events.push_back(std::move(arc));
        reasons.push_back(StopReason::max_arc_length);
    }

    OdeState<6> y0{x0.x, x0.y, p0.x, p0.y, 0.0, 0.0};
    {
        TrajectoryPoint q = detail::decode_point(0.0, y0);
        detail::fill_diagnostics(model, q);
        detail::fill_embedding(model, q);
        traj.points.push_back(q);
    }

    bool energy_violated = false;
    auto observer = [&](const DenseSegment<6>& seg) -> bool {
        detail::record_segment(model, seg, cfg.record_action_rtol, traj);
        const TrajectoryPoint& q = traj.points.back();
        const double scale = std::max(1.0, drift_norm2(model, q.x));
        if (std::abs(q.h_resid) > cfg.h_resid_guard * scale) {
            energy_violated = true;
            return false;
        }
        return true;
    };

    const auto res = integrate<6>(rhs, y0, 0.0, cfg.max_time, opt, events, observer);
    traj.n_accepted = res.n_accepted;
    traj.n_rejected = res.n_rejected;

    switch (res.status) {
        case OdeStatus::reached_end:
            traj.stop = StopReason::reached_time;
            break;
        case OdeStatus::event:
            traj.stop = reasons[static_cast<std::size_t>(res.event_index)];
            break;
        case OdeStatus::observer_stop:
            traj.stop = energy_violated ? StopReason::energy_violation : StopReason::none;
            break;
        case OdeStatus::step_failure:
            traj.stop = StopReason::step_failure;
            break;
        case OdeStatus::max_steps:
            traj.stop = StopReason::step_budget;
            break;
    }
    return traj;
}

enum class SeedMode { auto_select, linear_modes, gamma_fan };

/// How a fan seed was constructed; chi parametrises the family (mode mixing
/// angle for linearised seeding, ellipse angle for the gamma fan).
struct FanSeed {
    double chi = 0.0;
    Vec2 x{};
    Vec2 p{};
};

struct FanConfig {
    SeedMode mode = SeedMode::auto_select;
    int fan_size = 16;
    double seed_radius = 1e-3;
    /// gamma fan: seeds placed at x* + seed_radius * seed_direction.
    Vec2 seed_direction{1.0, 0.0};
    /// gamma fan: skip seeds within this angle of the zero-momentum point.
    double gamma_skip_band = 0.05;
};

struct FanResult {
    FixedPointModes modes;
    SeedMode used_mode = SeedMode::linear_modes;
    std::vector<FanSeed> seeds;
    std::vector<Trajectory> trajectories;
};

/// Seed on the escaping plane of the linearisation: mixing angle chi selects
/// u(chi) = cos(chi) u1 + sin(chi) u2 (likewise w), the position offset is
/// rescaled to seed_radius, and the momentum is projected onto H = 0.
template <DriftModel2D M>
std::optional<FanSeed> linear_mode_seed(const M& model, const FixedPointModes& fp,
                                        double chi, double seed_radius) {
    const Vec2 u = std::cos(chi) * fp.u[0] + std::sin(chi) * fp.u[1];
    const Vec2 w = std::cos(chi) * fp.w[0] + std::sin(chi) * fp.w[1];
    const double un = norm(u);
    if (un <= 1e-14)
        return std::nullopt;
    const double scale = seed_radius / un;
    FanSeed seed;
    seed.chi = chi;
    seed.x = fp.x + scale * u;
    seed.p = scale * w;
    if (!project_zero_energy(model, seed.x, seed.p))
        return std::nullopt;
    return seed;
}

/// Seed at a fixed offset position with momentum on the zero-energy ellipse
/// at angle chi; used at chart poles where the linearisation degenerates.
template <DriftModel2D M>
std::optional<FanSeed> gamma_fan_seed(const M& model, Vec2 x_star, double chi,
                                      const FanConfig& fc) {
    FanSeed seed;
    seed.chi = chi;
    seed.x = x_star + fc.seed_radius * fc.seed_direction;
    const double g0 = gamma0(model, seed.x);
    const double d = std::remainder(chi - g0, 2.0 * M_PI);
    if (std::abs(d) < fc.gamma_skip_band)
        return std::nullopt;
    seed.p = momentum_on_ellipse(model, seed.x, chi);
    return seed;
}

/// Shoot a fan of candidate instantons out of the fixed point x*.
template <DriftModel2D M>
FanResult fan_shoot(const M& model, Vec2 x_star, const FanConfig& fc,
                    const ShootingConfig& cfg) {
    FanResult out;
    out.modes = linearize_fixed_point(model, x_star);
    out.used_mode = fc.mode;
    if (fc.mode == SeedMode::auto_select)
        out.used_mode = out.modes.defective ? SeedMode::gamma_fan : SeedMode::linear_modes;

    for (int k = 0; k < fc.fan_size; ++k) {
        const double chi = 2.0 * M_PI * k / fc.fan_size;
        std::optional<FanSeed> seed;
        if (out.used_mode == SeedMode::linear_modes)
            seed = linear_mode_seed(model, out.modes, chi, fc.seed_radius);
        else
            seed = gamma_fan_seed(model, x_star, chi, fc);
        if (!seed)
            continue;
        out.seeds.push_back(*seed);
        out.trajectories.push_back(shoot(model, seed->x, seed->p, cfg));
    }
    return out;
}

/// Signed miss distance of a shot with respect to a target: the second
/// coordinate at the first falling crossing of x = x_cross, zero for shots
/// that stopped inside the target ball.  Empty when the shot never got there.
inline std::optional<double> plane_miss(const Trajectory& traj, double x_cross) {
    if (traj.stop == StopReason::fixed_point)
        return 0.0;
    for (std::size_t k = 1; k < traj.points.size(); ++k) {
        const auto& a = traj.points[k - 1];
        const auto& b = traj.points[k];
        if (a.x.x > x_cross && b.x.x <= x_cross) {
            const double w = (a.x.x - x_cross) / (a.x.x - b.x.x);
            return a.x.y + w * (b.x.y - a.x.y);
        }
    }
    return std::nullopt;
}

/// Closest recorded approach to a target point and which side (second
/// coordinate offset) the pass happened on.  The side flips sign across a
/// seed that runs into the target, which makes it a robust bisection
/// variable even for members that wander off before reaching the target.
struct ApproachInfo {
    double distance = std::numeric_limits<double>::infinity();
    double side = 0.0;
};

inline ApproachInfo closest_approach(const Trajectory& traj, Vec2 target) {
    ApproachInfo a;
    for (const auto& q : traj.points) {
        const double r = norm(q.x - target);
        if (r < a.distance) {
            a.distance = r;
            a.side = q.x.y - target.y;
        }
    }
    return a;
}

/// Largest deviation of the recorded velocity direction from the reversed
/// drift, measured as |1 + cos psi|.  Points where the drift norm falls below
/// `floor_frac` of its maximum along the path are skipped: the angle is
/// ill-conditioned where the drift vanishes (seed and target endpoints).
template <typename Model>
double antiparallel_deviation(const Model& model, const Trajectory& traj,
                              double floor_frac = 0.01) {
    double fmax = 0.0;
    std::vector<double> fnorm(traj.points.size());
    for (std::size_t k = 0; k < traj.points.size(); ++k) {
        fnorm[k] = std::sqrt(drift_norm2(model, traj.points[k].x));
        fmax = std::max(fmax, fnorm[k]);
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.points.size(); ++k)
        if (fnorm[k] >= floor_frac * fmax)
            worst = std::max(worst, std::abs(1.0 + std::cos(traj.points[k].psi)));
    return worst;
}

struct RefinedHit {
    double chi = 0.0;
    Trajectory trajectory;
};

/// Bisect the seed parameter between adjacent fan members whose closest
/// approaches pass the target on opposite sides (and at least one comes
/// within `proximity`), until a shot lands in the target ball.  `reshoot(chi)`
/// must rebuild the seed and shoot it with the target stop active.
template <typename Reshoot>
std::vector<RefinedHit> refine_fan_hits(const std::vector<double>& chis,
                                        const std::vector<Trajectory>& fan,
                                        Vec2 target, Reshoot&& reshoot,
                                        double proximity = 0.5, int max_iter = 80) {
    std::vector<RefinedHit> hits;
    const std::size_t n = chis.size();
    if (n < 2)
        return hits;
    std::vector<ApproachInfo> ca(n);
    for (std::size_t k = 0; k < n; ++k)
        ca[k] = closest_approach(fan[k], target);

    for (std::size_t k = 0; k < n; ++k) {
        // Direct hits need no bisection.
        if (fan[k].stop == StopReason::fixed_point)
            hits.push_back({chis[k], fan[k]});
    }

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = (k + 1) % n;
        if (fan[k].stop == StopReason::fixed_point || fan[j].stop == StopReason::fixed_point)
            continue;
        if (std::min(ca[k].distance, ca[j].distance) > proximity)
            continue;
        if ((ca[k].side < 0.0) == (ca[j].side < 0.0))
            continue;
        double lo = chis[k];
        double hi = chis[j];
        if (hi < lo)
            hi += 2.0 * M_PI;
        double side_lo = ca[k].side;
        for (int it = 0; it < max_iter && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            Trajectory t = reshoot(mid);
            if (t.stop == StopReason::fixed_point) {
                hits.push_back({mid, std::move(t)});
                break;
            }
            const double side = closest_approach(t, target).side;
            if ((side < 0.0) == (side_lo < 0.0)) {
                lo = mid;
                side_lo = side;
            } else {
                hi = mid;
            }
        }
    }
    return hits;
}

}  // namespace fwescape
