#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "fwescape/drift_model.hpp"
#include "fwescape/models/macrospin.hpp"
#include "fwescape/rng.hpp"
#include "fwescape/stats.hpp"
#include "fwescape/vec.hpp"

namespace fwescape {

/// Heun predictor-corrector step for planar dynamics with additive isotropic
/// noise, dx = F dt + amp dW.  dw is the Wiener increment over h (variance h
/// per component).  With additive noise the Stratonovich and Ito readings
/// coincide and the drift part is second order in h.
template <DriftModel2D M>
Vec2 heun_step(const M& model, Vec2 x, double h, double amp, Vec2 dw) {
    const Vec2 f0 = model.drift(x);
    const Vec2 xp = x + h * f0 + amp * dw;
    const Vec2 f1 = model.drift(xp);
    return x + 0.5 * h * (f0 + f1) + amp * dw;
}

/// Diffusion matrix of the stochastic spin dynamics applied to a noise
/// vector: B(m) w = sqrtC [alpha (w - m (m.w)) - m x w].  The radial part of
/// w is annihilated and the tangent plane sees an isotropic gain of
/// sqrtC sqrt(1 + alpha^2), so the noise is state-independent on the sphere
/// despite appearances.
inline Vec3 sllgs_diffusion_apply(const models::Macrospin& spin, Vec3 m,
                                  Vec3 w, double sqrtC) {
    return sqrtC *
           (spin.prm.alpha * (w - dot(m, w) * m) - cross(m, w));
}

/// Diffusion constant making exp(-energy/eps_noise) the stationary law of
/// the damped, undriven spin: the tangent noise variance C (1 + alpha^2)
/// must balance the damping gradient alpha.
inline double sllgs_diffusion_constant(double alpha, double eps_noise) {
    return alpha * eps_noise / (1.0 + alpha * alpha);
}

/// Stratonovich Heun step of the stochastic spin dynamics.  Drift and
/// diffusion are averaged between the base point and the predictor, and the
/// result is projected back to the unit sphere.  dw has variance h per
/// component.
inline Vec3 sllgs_heun_step(const models::Macrospin& spin, Vec3 m, double h,
                            double sqrtC, Vec3 dw) {
    const Vec3 a0 = spin.dynamics(m);
    const Vec3 b0 = sllgs_diffusion_apply(spin, m, dw, sqrtC);
    const Vec3 mp = m + h * a0 + b0;
    const Vec3 a1 = spin.dynamics(mp);
    const Vec3 b1 = sllgs_diffusion_apply(spin, mp, dw, sqrtC);
    return normalized(m + 0.5 * h * (a0 + a1) + 0.5 * (b0 + b1));
}

struct SimConfig {
    double eps_noise = 0.05;
    double dt = 1e-2;
    double max_time = 1e5;
    int realizations = 1;
    Vec2 x0{1.0, 0.0};
    std::uint64_t seed = 0;
    /// When set, each event records the state's y at its last crossing of
    /// the section line x = section_x before escape.
    std::optional<double> section_x;
    std::function<bool(Vec2)> stop;
};

struct EscapeEvent {
    std::size_t realization = 0;
    std::uint64_t stream_seed = 0;
    double exit_time = 0.0;
    Vec2 exit{};
    std::optional<double> section_y;
};

struct EscapeSummary {
    std::vector<EscapeEvent> events;
    std::size_t censored = 0;
    std::size_t realizations = 0;
    double eps_noise = 0.0;
};

/// Independent noise realizations from counter-derived streams; an event is
/// recorded on the first stop-set hit, everything else is censored
/// (including the rare realization that leaves the finite domain).
template <DriftModel2D M>
EscapeSummary simulate_escapes(const M& model, const SimConfig& cfg) {
    if (!(cfg.dt > 0.0) || !(cfg.eps_noise > 0.0) || cfg.realizations < 1)
        throw std::invalid_argument(
            "simulate_escapes: need dt > 0, eps_noise > 0, realizations >= 1");
    if (!cfg.stop)
        throw std::invalid_argument("simulate_escapes: stop set required");

    const double amp = std::sqrt(2.0 * cfg.eps_noise);
    const double root_h = std::sqrt(cfg.dt);
    const auto steps = static_cast<long long>(std::ceil(cfg.max_time / cfg.dt));

    EscapeSummary out;
    out.realizations = static_cast<std::size_t>(cfg.realizations);
    out.eps_noise = cfg.eps_noise;
    for (int r = 0; r < cfg.realizations; ++r) {
        const std::uint64_t stream =
            derive_stream_seed(cfg.seed, static_cast<std::uint64_t>(r));
        std::mt19937_64 gen(stream);
        std::normal_distribution<double> gauss;
        Vec2 x = cfg.x0;
        std::optional<double> section_y;
        bool escaped = false;
        double t = 0.0;
        for (long long k = 0; k < steps; ++k) {
            const Vec2 dw{root_h * gauss(gen), root_h * gauss(gen)};
            const Vec2 xn = heun_step(model, x, cfg.dt, amp, dw);
            if (!finite(xn)) break;
            t += cfg.dt;
            if (cfg.section_x && x.x != xn.x) {
                const double c = *cfg.section_x;
                if ((x.x - c) * (xn.x - c) <= 0.0)
                    section_y = x.y + (c - x.x) / (xn.x - x.x) * (xn.y - x.y);
            }
            x = xn;
            if (cfg.stop(x)) {
                escaped = true;
                break;
            }
        }
        if (escaped)
            out.events.push_back(
                {static_cast<std::size_t>(r), stream, t, x, section_y});
        else
            ++out.censored;
    }
    return out;
}

struct StationaryCheck {
    double d = 0.0;        ///< Kolmogorov-Smirnov statistic
    double p_value = 0.0;  ///< against exp(-energy/eps_noise) x sphere DOS
    double mean_energy = 0.0;
    std::size_t n = 0;
};

/// Long-run detailed-balance check of the undriven uniaxial spin: sampled
/// energies are tested against exp(-energy/eps_noise) weighted by the
/// density of states.  The energy CDF is integrated through z = sqrt(-e),
/// where the 1/sqrt(-e) state-density singularity disappears.
inline StationaryCheck sllgs_stationary_check(const models::Macrospin& spin,
                                              double eps_noise, double dt,
                                              double burn_in, int samples,
                                              double stride,
                                              std::uint64_t seed) {
    if (spin.prm.I != 0.0 || spin.prm.D != 0.0)
        throw std::invalid_argument(
            "sllgs_stationary_check: closed-form law needs I = 0, D = 0");
    if (!(dt > 0.0) || !(eps_noise > 0.0) || samples < 8 || !(stride > 0.0))
        throw std::invalid_argument("sllgs_stationary_check: bad sampling");

    const double sqrtC =
        std::sqrt(sllgs_diffusion_constant(spin.prm.alpha, eps_noise));
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> gauss;
    const double rh = std::sqrt(dt);
    Vec3 m{0.0, 0.0, 1.0};
    const auto advance = [&](double time) {
        const auto steps = static_cast<long long>(std::ceil(time / dt));
        for (long long k = 0; k < steps; ++k) {
            const Vec3 dw{rh * gauss(gen), rh * gauss(gen), rh * gauss(gen)};
            m = sllgs_heun_step(spin, m, dt, sqrtC, dw);
        }
    };

    advance(burn_in);
    StationaryCheck out;
    std::vector<double> energies;
    energies.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        advance(stride);
        energies.push_back(spin.energy(m));
        out.mean_energy += energies.back();
    }
    out.n = energies.size();
    out.mean_energy /= static_cast<double>(out.n);

    const int ng = 20000;
    std::vector<double> cum(ng + 1, 0.0);
    const auto pdf_z = [&](double z) { return std::exp(z * z / eps_noise); };
    for (int i = 1; i <= ng; ++i) {
        const double a = static_cast<double>(i - 1) / ng;
        const double b = static_cast<double>(i) / ng;
        cum[i] = cum[i - 1] + 0.5 * (pdf_z(a) + pdf_z(b)) * (b - a);
    }
    const double Z = cum.back();
    const auto cdf = [&](double e) {
        const double z = std::sqrt(std::max(0.0, -e));
        if (z >= 1.0) return 0.0;
        const auto j = static_cast<std::size_t>(std::ceil(z * ng));
        if (j == 0) return 1.0;
        const double za = static_cast<double>(j - 1) / ng;
        const double w = (z - za) * ng;
        return 1.0 - (cum[j - 1] + w * (cum[j] - cum[j - 1])) / Z;
    };

    out.d = ks_statistic(energies, cdf);
    out.p_value = ks_p_value(out.d, out.n);
    return out;
}

}  // namespace fwescape
