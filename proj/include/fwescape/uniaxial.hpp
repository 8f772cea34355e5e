#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fwescape/trajectory.hpp"
#include "fwescape/vec.hpp"

namespace fwescape {

/// Closed-form azimuth of the axisymmetric (zero-tilt) escape path as a
/// function of the polar angle, up to an additive gauge constant:
///   phi(theta) = [log tan(theta/2) + I log(2(I + cos theta)/sin theta)]
///                / (alpha (1 - I^2)).
/// Its derivative is cos(theta) / (alpha (I + cos theta) sin theta), which
/// diverges at the theta = 0 pole and at the theta = arccos(-I) separatrix.
inline double analytic_phi_of_theta(double theta, double alpha, double I) {
    if (std::abs(I) >= 1.0)
        throw std::domain_error("analytic_phi_of_theta: |I| must be < 1");
    const double theta_sep = std::acos(-I);
    if (theta <= 0.0 || theta >= theta_sep)
        throw std::domain_error(
            "analytic_phi_of_theta: theta outside (0, arccos(-I)); the "
            "azimuth diverges at the pole and at the separatrix");
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return (std::log(std::tan(0.5 * theta)) + I * std::log(2.0 * (I + c) / s)) /
           (alpha * (1.0 - I * I));
}

/// Accumulated action of the detailed-balance escape branch p = -2f from the
/// pole up to theta:  S(theta) = 2 alpha [I (1 - cos theta) + sin^2(theta)/2].
/// At the separatrix theta* = arccos(-I) this closes to alpha (1 + I)^2.
inline double analytic_uniaxial_action(double theta, double alpha, double I) {
    if (std::abs(I) > 1.0)
        throw std::domain_error("analytic_uniaxial_action: |I| must be <= 1");
    const double theta_sep = std::acos(-I);
    if (theta < 0.0 || theta > theta_sep + 1e-12)
        throw std::domain_error(
            "analytic_uniaxial_action: theta outside [0, arccos(-I)]");
    const double c = std::cos(theta);
    const double s2 = 1.0 - c * c;
    return 2.0 * alpha * (I * (1.0 - c) + 0.5 * s2);
}

/// Deviation of a recorded escape path from the closed-form phi(theta).
struct OracleComparison {
    double rms = 0.0;
    double max_abs = 0.0;
    double gauge = 0.0;        // fitted additive azimuth offset
    double orientation = 1.0;  // fitted sense of precession vs the formula
    double I_eff = 0.0;        // current actually fed to the closed form
    std::size_t n_points = 0;
    bool window_restricted = false;  // non-monotone polar angle was skipped
};

/// Compare a spherical trajectory against the zero-tilt closed form on a
/// polar window excluding the pole and separatrix neighborhoods.  The
/// azimuth is reconstructed unwrapped from the embedded sphere points, so
/// any chart and any number of precession turns are handled uniformly.  The
/// comparison fixes the two conventions the formula leaves free: the
/// additive gauge (rotational symmetry) and the sense of precession (chart
/// handedness).  With `effective` set, the current is rescaled by cos(omega)
/// before evaluating the formula: a tilted polarizer raises the critical
/// current by 1/cos(omega), so a given drive acts like a weaker one in the
/// zero-tilt theory.
///
/// With `turn_averaged` set, the polar angle is azimuth-averaged over each
/// complete turn of winding before the fit.  A tilted drive excites a polar
/// ripple of fixed amplitude at the precession frequency; pointwise
/// comparison multiplies that ripple by the steep d(phi)/d(theta) near the
/// window edges, drowning the mean spiral in radians of spurious deviation.
/// Averaging over full turns cancels the ripple's first harmonic exactly.
inline OracleComparison compare_to_oracle(const Trajectory& traj, double alpha,
                                          double I, bool effective = false,
                                          double omega = 0.0,
                                          double theta_lo = 0.1,
                                          double sep_margin = 0.05,
                                          bool turn_averaged = false) {
    OracleComparison out;
    out.I_eff = effective ? I * std::cos(omega) : I;
    const double theta_hi = std::acos(-out.I_eff) - sep_margin;

    std::vector<double> th_all, ph_all;
    th_all.reserve(traj.points.size());
    ph_all.reserve(traj.points.size());
    double prev_raw = 0.0;
    double unwrapped = 0.0;
    for (const auto& q : traj.points) {
        double theta, raw;
        if (q.has_m) {
            theta = std::acos(std::clamp(q.m.z, -1.0, 1.0));
            raw = std::atan2(q.m.y, q.m.x);
        } else {
            theta = q.x.x;
            raw = q.x.y;
        }
        if (th_all.empty()) {
            unwrapped = raw;
        } else {
            double d = raw - prev_raw;
            d -= 2.0 * M_PI * std::round(d / (2.0 * M_PI));
            unwrapped += d;
        }
        prev_raw = raw;
        th_all.push_back(theta);
        ph_all.push_back(unwrapped);
    }

    std::vector<double> cand_th, cand_ph;
    if (turn_averaged && th_all.size() > 1) {
        const double total = ph_all.back() - ph_all.front();
        if (std::abs(total) >= 2.0 * M_PI) {
            const double step = std::copysign(2.0 * M_PI, total);
            double lo = ph_all.front();
            double target = lo + step;
            double area = 0.0;
            double tprev = th_all.front();
            double pprev = ph_all.front();
            for (std::size_t i = 1; i < th_all.size(); ++i) {
                double tc = th_all[i];
                double pc = ph_all[i];
                while ((pc - target) * step >= 0.0) {
                    const double w = (target - pprev) / (pc - pprev);
                    const double tcross = tprev + w * (tc - tprev);
                    area += 0.5 * (tprev + tcross) * (target - pprev);
                    cand_th.push_back(area / step);
                    cand_ph.push_back(lo + 0.5 * step);
                    lo = target;
                    target += step;
                    area = 0.0;
                    tprev = tcross;
                    pprev = lo;
                }
                area += 0.5 * (tprev + tc) * (pc - pprev);
                tprev = tc;
                pprev = pc;
            }
        }
    } else {
        cand_th = std::move(th_all);
        cand_ph = std::move(ph_all);
    }

    std::vector<double> th, ph;
    double last_kept = -1.0;
    for (std::size_t i = 0; i < cand_th.size(); ++i) {
        const double theta = cand_th[i];
        if (theta < theta_lo || theta > theta_hi)
            continue;
        if (theta <= last_kept) {
            out.window_restricted = true;
            continue;
        }
        last_kept = theta;
        th.push_back(theta);
        ph.push_back(cand_ph[i]);
    }
    out.n_points = th.size();
    if (th.empty())
        return out;

    double best_rms = -1.0;
    for (const double sign : {1.0, -1.0}) {
        double mean = 0.0;
        std::vector<double> dev(th.size());
        for (std::size_t k = 0; k < th.size(); ++k) {
            dev[k] = ph[k] - sign * analytic_phi_of_theta(th[k], alpha, out.I_eff);
            mean += dev[k];
        }
        mean /= th.size();
        double ss = 0.0;
        double worst = 0.0;
        for (double d : dev) {
            ss += (d - mean) * (d - mean);
            worst = std::max(worst, std::abs(d - mean));
        }
        const double rms = std::sqrt(ss / th.size());
        if (best_rms < 0.0 || rms < best_rms) {
            best_rms = rms;
            out.rms = rms;
            out.max_abs = worst;
            out.gauge = mean;
            out.orientation = sign;
        }
    }
    return out;
}

}  // namespace fwescape
