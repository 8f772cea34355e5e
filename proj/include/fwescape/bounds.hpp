#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fwescape/models/macrospin.hpp"

namespace fwescape {

/// Bounds comparing the two leading contributions to the squared drift norm
/// of a biaxial macrospin along a constant-energy contour eps < 0, with the
/// energy written as eps = D mx^2 - mz^2 and h = -grad(eps).  The drive term
/// is evaluated at the critical current, so its contour maximum is an upper
/// bound over every sub-critical drive.

inline double precessional_min(double epsilon, double D) {
    if (!(epsilon >= -1.0 && epsilon < 0.0))
        throw std::domain_error("precessional_min: need epsilon in [-1, 0)");
    (void)D;  // the contour minimum sits at mz^2 = |eps|, independent of D
    const double e = -epsilon;
    return 4.0 * e * (1.0 - e);
}

/// Maximum of the tilt-weighted contour factor
///   sqrt(1 - (D+1) mz^2 / (D+|eps|)) [sqrt(mz^2/|eps| - 1)
///                                     + |tan(omega)| mz / sqrt(D |eps|)]
/// over the reachable mz range of the contour.  Coarse scan (the objective
/// is near-unimodal but the scan guards against surprises), then
/// golden-section refinement of the best bracket.  Only |tan(omega)| enters:
/// the contour is symmetric under my -> -my.
inline double q_factor(double eps_abs, double D, double omega) {
    if (!(D > 0.0))
        throw std::domain_error("q_factor: needs D > 0");
    if (!(eps_abs > 0.0 && eps_abs < 1.0))
        throw std::domain_error("q_factor: need |eps| in (0, 1)");
    const double mz_lo = std::sqrt(eps_abs);
    const double mz_hi = std::sqrt((D + eps_abs) / (D + 1.0));
    if (!(mz_lo < mz_hi))
        throw std::domain_error("q_factor: empty mz range");
    const double tilt = std::abs(std::tan(omega)) / std::sqrt(D);
    const auto g = [&](double mz) {
        const double a = 1.0 - (D + 1.0) * mz * mz / (D + eps_abs);
        const double b = mz * mz / eps_abs - 1.0;
        return std::sqrt(std::max(0.0, a)) *
               (std::sqrt(std::max(0.0, b)) + tilt * mz / std::sqrt(eps_abs));
    };

    const int n = 1000;
    int kbest = 0;
    double best = -1.0;
    for (int k = 0; k <= n; ++k) {
        const double v = g(mz_lo + (mz_hi - mz_lo) * k / n);
        if (v > best) {
            best = v;
            kbest = k;
        }
    }
    double a = mz_lo + (mz_hi - mz_lo) * std::max(0, kbest - 1) / n;
    double b = mz_lo + (mz_hi - mz_lo) * std::min(n, kbest + 1) / n;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = g(x1);
    double f2 = g(x2);
    while (b - a > 1e-10) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = g(x1);
        }
    }
    return std::max(best, std::max(f1, f2));
}

/// Contour maximum of the nongradient drive term at the critical current.
/// Three closed-form branches: the axisymmetric D = 0 case, and the two
/// critical-current regimes on either side of the branch crossing.
inline double nongradient_max(double epsilon, double D, double omega,
                              double alpha) {
    if (!(epsilon > -1.0 && epsilon < 0.0))
        throw std::domain_error("nongradient_max: need epsilon in (-1, 0)");
    if (!(D >= 0.0))
        throw std::domain_error("nongradient_max: needs D >= 0");
    const double e = -epsilon;
    if (D == 0.0)
        return 4.0 * alpha * std::sqrt(e * (1.0 - e)) * std::abs(std::tan(omega));
    const double q = q_factor(e, D, omega);
    if (D >= models::kMacrospinBranchCrossD)
        return (8.0 * alpha / M_PI) * std::sqrt(D * (D + 1.0) * (D + e) * e) * q;
    return 2.0 * alpha * (D + 2.0) * std::sqrt((D + e) * e) * q;
}

enum class TiltRegime { small_tilt, large_tilt };

inline const char* to_string(TiltRegime r) {
    return r == TiltRegime::small_tilt ? "small_tilt" : "large_tilt";
}

/// Interval of energy magnitudes |eps| on which the precessional lower bound
/// strictly exceeds the drive upper bound, so the drift-norm landscape keeps
/// its drive-free structure and escape paths stay caustic-free.  In the
/// large-tilt regime no interval is claimed.  asymptotic_lo / asymptotic_hi
/// carry the leading-order edge estimates (alpha^2 tan^2(omega) without a
/// hard axis, D alpha tan(omega) once the hard axis acts); the reported
/// (eps_lo, eps_hi) interval is the exact dominance region of the two bound
/// functions, which is narrower whenever the tilt-independent part of the
/// drive bound matters.
struct AdmissibilityBand {
    double D = 0.0;
    double omega = 0.0;
    double alpha = 0.0;
    double eps_lo = 0.0;
    double eps_hi = 0.0;
    double asymptotic_lo = 0.0;
    double asymptotic_hi = 0.0;
    TiltRegime regime = TiltRegime::small_tilt;

    bool empty() const { return !(eps_lo < eps_hi); }
};

namespace detail {

inline double dominance_margin(double e, double D, double omega,
                               double alpha) {
    return precessional_min(-e, D) - nongradient_max(-e, D, omega, alpha);
}

/// Bisect a sign change of the dominance margin between lo (sign slo) and hi.
inline double bisect_margin(double lo, double hi, double slo, double D,
                            double omega, double alpha) {
    for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((detail::dominance_margin(mid, D, omega, alpha) > 0.0) ==
            (slo > 0.0))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// The regime threshold tan(omega) * alpha = 0.1 is inclusive on the
/// small-tilt side so that boundary parameter sets keep their band; a
/// relative roundoff allowance keeps angles built via atan from tipping over.
inline AdmissibilityBand admissibility_band(double D, double omega,
                                            double alpha) {
    if (!(D >= 0.0))
        throw std::domain_error("admissibility_band: needs D >= 0");
    AdmissibilityBand band;
    band.D = D;
    band.omega = omega;
    band.alpha = alpha;
    const double t = std::abs(std::tan(omega));
    const double w0 = alpha * alpha * t * t;
    if (D == 0.0 || D <= w0) {
        band.asymptotic_lo = w0;
        band.asymptotic_hi = 1.0 - w0;
    } else if (D < 1.0) {
        band.asymptotic_lo = D * alpha * t;
        band.asymptotic_hi = 1.0 - w0;
    } else {
        band.asymptotic_lo = D * alpha * t;
        band.asymptotic_hi = 1.0 - D * alpha * t;
    }
    if (!(t * alpha <= 0.1 * (1.0 + 1e-12))) {
        band.regime = TiltRegime::large_tilt;
        return band;
    }
    band.regime = TiltRegime::small_tilt;

    if (D == 0.0) {
        // min > max reduces to e(1-e) > (alpha tan(omega))^2, solvable exactly
        const double disc = 1.0 - 4.0 * w0;
        if (disc > 0.0) {
            band.eps_lo = 0.5 * (1.0 - std::sqrt(disc));
            band.eps_hi = 0.5 * (1.0 + std::sqrt(disc));
        }
        return band;
    }

    std::vector<double> es;
    for (double e = 1e-10; e < 0.5; e *= 1.03) es.push_back(e);
    es.push_back(0.5);
    for (double e = 1e-10; e < 0.5; e *= 1.03) es.push_back(1.0 - e);
    std::sort(es.begin(), es.end());

    std::vector<char> pos(es.size());
    for (std::size_t i = 0; i < es.size(); ++i)
        pos[i] = detail::dominance_margin(es[i], D, omega, alpha) > 0.0;

    std::size_t run_lo = 0, run_hi = 0;
    bool found = false;
    for (std::size_t i = 0; i < es.size();) {
        if (!pos[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < es.size() && pos[j + 1]) ++j;
        if (!found || es[j] - es[i] > es[run_hi] - es[run_lo]) {
            run_lo = i;
            run_hi = j;
            found = true;
        }
        i = j + 1;
    }
    if (!found) return band;

    band.eps_lo = run_lo == 0 ? 0.0
                              : detail::bisect_margin(es[run_lo - 1], es[run_lo],
                                                      -1.0, D, omega, alpha);
    band.eps_hi = run_hi + 1 == es.size()
                      ? 1.0
                      : detail::bisect_margin(es[run_hi], es[run_hi + 1], 1.0,
                                              D, omega, alpha);
    return band;
}

}  // namespace fwescape
