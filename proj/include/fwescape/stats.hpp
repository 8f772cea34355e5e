#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace fwescape {

namespace detail {

inline double mean_of(const std::vector<double>& v, std::size_t lo,
                      std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s / static_cast<double>(hi - lo);
}

inline double var_of(const std::vector<double>& v, std::size_t lo,
                     std::size_t hi, double mu) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += (v[i] - mu) * (v[i] - mu);
    return s / static_cast<double>(hi - lo - 1);
}

}  // namespace detail

/// Separation statistic of a median split: the two halves' means measured in
/// their pooled standard deviation.  A single Gaussian already scores about
/// 2.65 on this (half-normal geometry), so the raw value only becomes
/// evidence for two modes against a calibrated unimodal null.
inline double median_split_separation(std::vector<double> v) {
    if (v.size() < 4)
        throw std::invalid_argument("median_split_separation: need >= 4 samples");
    std::sort(v.begin(), v.end());
    const std::size_t half = v.size() / 2;
    const double mu_lo = detail::mean_of(v, 0, half);
    const double mu_hi = detail::mean_of(v, half, v.size());
    const double var_lo = detail::var_of(v, 0, half, mu_lo);
    const double var_hi = detail::var_of(v, half, v.size(), mu_hi);
    const double pooled = std::sqrt(0.5 * (var_lo + var_hi));
    const double gap = std::abs(mu_hi - mu_lo);
    if (!(pooled > 0.0))
        return gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return gap / pooled;
}

struct BimodalityReport {
    std::size_t n = 0;
    double separation = 0.0;  ///< observed median-split separation
    double null_mean = 0.0;   ///< average separation under the Gaussian null
    double p_value = 1.0;     ///< P(separation >= observed | unimodal null)
    bool bimodal(double level = 0.05) const { return p_value < level; }
};

/// Parametric bootstrap test of bimodality: fit a single Gaussian to the
/// sample, resample datasets of the same size from it, and rank the observed
/// median-split separation against the null distribution.
inline BimodalityReport bimodality_test(const std::vector<double>& v,
                                        int resamples = 400,
                                        std::uint64_t seed = 0x9d2c5680u) {
    if (v.size() < 8)
        throw std::invalid_argument("bimodality_test: need >= 8 samples");
    if (resamples < 1)
        throw std::invalid_argument("bimodality_test: need >= 1 resample");
    BimodalityReport rep;
    rep.n = v.size();
    rep.separation = median_split_separation(v);

    const double mu = detail::mean_of(v, 0, v.size());
    const double sd = std::sqrt(detail::var_of(v, 0, v.size(), mu));
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> gauss(mu, sd);
    std::vector<double> draw(v.size());
    int at_least = 0;
    double null_sum = 0.0;
    for (int b = 0; b < resamples; ++b) {
        for (auto& d : draw) d = gauss(gen);
        const double s = median_split_separation(draw);
        null_sum += s;
        if (s >= rep.separation) ++at_least;
    }
    rep.null_mean = null_sum / resamples;
    rep.p_value = (1.0 + at_least) / (1.0 + resamples);
    return rep;
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a continuous
/// reference CDF.
inline double ks_statistic(std::vector<double> v,
                           const std::function<double(double)>& cdf) {
    if (v.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = cdf(v[i]);
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
        d = std::max(d, f - static_cast<double>(i) / n);
    }
    return d;
}

/// Asymptotic two-sided KS p-value with the Stephens small-sample
/// correction lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) d.
inline double ks_p_value(double d, std::size_t n) {
    if (n == 0) throw std::invalid_argument("ks_p_value: empty sample");
    const double rn = std::sqrt(static_cast<double>(n));
    const double lam = (rn + 0.12 + 0.11 / rn) * d;
    if (lam < 1e-3) return 1.0;
    double q = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * lam * lam * k * k);
        q += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * q, 0.0, 1.0);
}

}  // namespace fwescape
