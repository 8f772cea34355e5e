#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <type_traits>
#include <vector>

namespace fwescape {

template <std::size_t N>
using OdeState = std::array<double, N>;

/// Cubic Hermite interpolant over one accepted step; `f` values are the exact
/// derivatives at the endpoints (the right one comes free from FSAL).
template <std::size_t N>
struct DenseSegment {
    double t0 = 0.0, t1 = 0.0;
    OdeState<N> y0{}, y1{}, f0{}, f1{};

    OdeState<N> eval(double t) const {
        const double h = t1 - t0;
        const double s = (t - t0) / h;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1;
        const double h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2;
        const double h11 = s3 - s2;
        OdeState<N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i];
        return y;
    }
};

/// Scalar event g(t, y); fires on a sign change of g in the requested
/// direction and is located by bisection on the dense interpolant.
template <std::size_t N>
struct OdeEvent {
    std::function<double(double, const OdeState<N>&)> g;
    int direction = 0;  // +1 rising zero, -1 falling, 0 either
    bool terminal = true;
};

enum class OdeStatus { reached_end, event, step_failure, max_steps, observer_stop };

template <std::size_t N>
struct OdeResult {
    OdeStatus status = OdeStatus::reached_end;
    int event_index = -1;
    double t = 0.0;
    OdeState<N> y{};
    std::size_t n_accepted = 0;
    std::size_t n_rejected = 0;
};

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double h_init = 0.0;  // 0 = choose from initial slope
    double h_min = 1e-14;
    double h_max = std::numeric_limits<double>::infinity();
    double event_t_tol = 1e-10;
    std::size_t max_steps = 50'000'000;
};

namespace detail {

// Dormand-Prince 5(4) coefficients.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
inline constexpr double dp_b5[7] = {35.0 / 384,     0.0,         500.0 / 1113, 125.0 / 192,
                                    -2187.0 / 6784, 11.0 / 84,   0.0};
inline constexpr double dp_b4[7] = {5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace detail

namespace detail {

// Observers may return void, or bool (false requests an early stop).
template <std::size_t N, typename Observer>
bool notify(Observer&& obs, const DenseSegment<N>& seg) {
    if constexpr (std::is_void_v<std::invoke_result_t<Observer&, const DenseSegment<N>&>>) {
        obs(seg);
        return true;
    } else {
        return obs(seg);
    }
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) with FSAL.  Integrates forward from t0 to
/// t_end, invoking `observer(segment)` after every accepted step and firing
/// events located on the dense output.  Rhs signature:
///   void rhs(double t, const OdeState<N>& y, OdeState<N>& dy)
template <std::size_t N, typename Rhs, typename Observer>
OdeResult<N> integrate(Rhs&& rhs, OdeState<N> y, double t0, double t_end,
                       const OdeOptions& opt, const std::vector<OdeEvent<N>>& events,
                       Observer&& observer) {
    using detail::dp_a;
    using detail::dp_b4;
    using detail::dp_b5;
    using detail::dp_c;

    OdeResult<N> res;
    double t = t0;

    std::array<OdeState<N>, 7> k;
    rhs(t, y, k[0]);

    std::vector<double> gval(events.size());
    for (std::size_t e = 0; e < events.size(); ++e)
        gval[e] = events[e].g(t, y);

    double h = opt.h_init;
    if (h <= 0.0) {
        double ynorm = 0.0, fnorm = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            ynorm = std::max(ynorm, std::abs(y[i]));
            fnorm = std::max(fnorm, std::abs(k[0][i]));
        }
        h = 0.01 * (1.0 + ynorm) / (1.0 + fnorm);
    }
    h = std::min({h, opt.h_max, t_end - t});

    bool done = t >= t_end;
    while (!done) {
        if (res.n_accepted + res.n_rejected >= opt.max_steps) {
            res.status = OdeStatus::max_steps;
            break;
        }
        if (h < opt.h_min) {
            res.status = OdeStatus::step_failure;
            break;
        }
        // Land exactly on t_end (with slack for the final rounding step).
        bool last = false;
        if (h >= (t_end - t) * (1.0 - 1e-12)) {
            h = t_end - t;
            last = true;
        }

        OdeState<N> ytmp;
        for (int stage = 1; stage < 7; ++stage) {
            for (std::size_t i = 0; i < N; ++i) {
                double acc = 0.0;
                for (int j = 0; j < stage; ++j)
                    acc += dp_a[stage][j] * k[j][i];
                ytmp[i] = y[i] + h * acc;
            }
            rhs(t + dp_c[stage] * h, ytmp, k[stage]);
        }
        // Stage 7 used y_new as input, so ytmp == y1 and k[6] = f(t+h, y1).
        const OdeState<N>& y1 = ytmp;

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double e = 0.0;
            for (int j = 0; j < 7; ++j)
                e += (dp_b5[j] - dp_b4[j]) * k[j][i];
            const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
            err = std::max(err, std::abs(h * e) / sc);
        }

        if (err > 1.0) {
            ++res.n_rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        ++res.n_accepted;
        DenseSegment<N> seg;
        seg.t0 = t;
        seg.t1 = t + h;
        seg.y0 = y;
        seg.y1 = y1;
        seg.f0 = k[0];
        seg.f1 = k[6];

        // Event detection on the accepted interval; earliest trigger wins.
        int fired = -1;
        double t_fire = seg.t1;
        for (std::size_t e = 0; e < events.size(); ++e) {
            const double g1 = events[e].g(seg.t1, y1);
            const double g0 = gval[e];
            const bool crossed = (g0 < 0.0 && g1 >= 0.0 && events[e].direction >= 0) ||
                                 (g0 > 0.0 && g1 <= 0.0 && events[e].direction <= 0);
            gval[e] = g1;
            if (!crossed)
                continue;
            double lo = seg.t0, hi = seg.t1;
            double glo = g0;
            while (hi - lo > opt.event_t_tol) {
                const double mid = 0.5 * (lo + hi);
                const double gm = events[e].g(mid, seg.eval(mid));
                if ((glo < 0.0) == (gm < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            if (hi < t_fire) {
                t_fire = hi;
                fired = static_cast<int>(e);
            }
        }

        if (fired >= 0 && events[fired].terminal) {
            seg.t1 = t_fire;
            seg.y1 = DenseSegment<N>{t, t + h, y, y1, k[0], k[6]}.eval(t_fire);
            rhs(t_fire, seg.y1, seg.f1);
            detail::notify(observer, seg);
            res.status = OdeStatus::event;
            res.event_index = fired;
            res.t = t_fire;
            res.y = seg.y1;
            return res;
        }

        if (!detail::notify(observer, seg)) {
            res.status = OdeStatus::observer_stop;
            res.t = seg.t1;
            res.y = y1;
            return res;
        }
        t = seg.t1;
        y = y1;
        k[0] = k[6];
        done = last;

        const double factor = err > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)))
                                        : 5.0;
        h = std::min(h * factor, opt.h_max);
    }

    res.t = t;
    res.y = y;
    return res;
}

/// Convenience overload without events.
template <std::size_t N, typename Rhs, typename Observer>
OdeResult<N> integrate(Rhs&& rhs, OdeState<N> y, double t0, double t_end,
                       const OdeOptions& opt, Observer&& observer) {
    return integrate<N>(std::forward<Rhs>(rhs), y, t0, t_end, opt, {},
                        std::forward<Observer>(observer));
}

}  // namespace fwescape
