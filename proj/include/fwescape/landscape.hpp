#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fwescape/drift_model.hpp"
#include "fwescape/fw.hpp"
#include "fwescape/vec.hpp"

namespace fwescape {

/// Uniform rectangular grid; node (0,0) sits at lo, node (nx-1,ny-1) at hi.
struct GridSpec {
    Vec2 lo{};
    Vec2 hi{};
    int nx = 512;
    int ny = 512;

    Vec2 node(int i, int j) const {
        return {lo.x + (hi.x - lo.x) * i / (nx - 1.0),
                lo.y + (hi.y - lo.y) * j / (ny - 1.0)};
    }
    Vec2 spacing() const {
        return {(hi.x - lo.x) / (nx - 1.0), (hi.y - lo.y) / (ny - 1.0)};
    }
    bool contains(Vec2 x) const {
        return x.x >= lo.x && x.x <= hi.x && x.y >= lo.y && x.y <= hi.y;
    }
};

enum class ExtremumType { minimum, maximum, saddle };

inline const char* to_string(ExtremumType t) {
    switch (t) {
        case ExtremumType::minimum: return "minimum";
        case ExtremumType::maximum: return "maximum";
        case ExtremumType::saddle: return "saddle";
    }
    return "?";
}

/// A critical point of the drift-norm surface.  lambda holds the Hessian
/// eigenvalues in descending order; the type follows their signs.
struct Extremum {
    Vec2 x{};
    double value = 0.0;
    ExtremumType type = ExtremumType::minimum;
    double lambda[2] = {0.0, 0.0};
    bool refined = false;    // Newton polish reached the gradient tolerance
    bool degenerate = false;  // some |lambda| below the degeneracy threshold
};

/// Sampled squared drift norm |f|^2_G over a grid.  For spinning models the
/// norm splits, to lowest order in the damping, into a conservative
/// precessional term |m x h|^2 and a nongradient drive term
/// 2 alpha I n_p . (m x h); those per-node terms are emitted alongside.
struct NormLandscape {
    GridSpec grid;
    std::vector<double> values;
    std::vector<double> precessional;
    std::vector<double> nongradient;
    std::vector<Extremum> extrema;

    double at(int i, int j) const {
        return values[static_cast<std::size_t>(i) +
                      static_cast<std::size_t>(grid.nx) * j];
    }
};

/// Gradient of |f|^2_G = sum_i F_i^2 / g2_i, assembled from the analytic
/// drift Jacobian and the metric derivative.
template <DriftModel2D M>
Vec2 norm_gradient(const M& model, Vec2 x) {
    const Vec2 F = model.drift(x);
    const Mat2 J = drift_jacobian(model, x);
    const Metric2 g = model.metric(x);
    Vec2 grad{};
    for (int k = 0; k < 2; ++k) {
        double s = 0.0;
        for (int i = 0; i < 2; ++i)
            s += (2.0 * F[i] * J.m[i][k] - F[i] * F[i] * g.dg2.m[i][k] / g.g2[i]) /
                 g.g2[i];
        grad[k] = s;
    }
    return grad;
}

/// Hessian of the squared norm by central differences of the analytic
/// gradient, symmetrized.
template <DriftModel2D M>
Mat2 norm_hessian(const M& model, Vec2 x) {
    Mat2 h;
    for (int k = 0; k < 2; ++k) {
        const double dk = 1e-6 * std::max(1.0, std::abs(x[k]));
        Vec2 xp = x, xm = x;
        xp[k] += dk;
        xm[k] -= dk;
        const Vec2 gp = norm_gradient(model, xp);
        const Vec2 gm = norm_gradient(model, xm);
        h.m[0][k] = (gp.x - gm.x) / (2.0 * dk);
        h.m[1][k] = (gp.y - gm.y) / (2.0 * dk);
    }
    const double off = 0.5 * (h.m[0][1] + h.m[1][0]);
    h.m[0][1] = off;
    h.m[1][0] = off;
    return h;
}

/// Newton polish of a critical-point candidate.  Steps are clamped to
/// max_step and the iterate must stay inside the rectangle [lo, hi]; failing
/// either leaves the candidate unrefined.
template <DriftModel2D M>
bool polish_extremum(const M& model, Vec2& x, Vec2 lo, Vec2 hi,
                     double max_step, double tol = 1e-8, int max_iter = 60) {
    Vec2 xc = x;
    for (int it = 0; it < max_iter; ++it) {
        const Vec2 G = norm_gradient(model, xc);
        if (std::hypot(G.x, G.y) <= tol) {
            x = xc;
            return true;
        }
        const Mat2 H = norm_hessian(model, xc);
        const double d = det(H);
        if (std::abs(d) < 1e-300)
            return false;
        Vec2 dx{(H.m[1][1] * G.x - H.m[0][1] * G.y) / d,
                (-H.m[1][0] * G.x + H.m[0][0] * G.y) / d};
        const double len = std::hypot(dx.x, dx.y);
        if (len > max_step)
            dx = dx * (max_step / len);
        xc = xc - dx;
        if (xc.x < lo.x || xc.x > hi.x || xc.y < lo.y || xc.y > hi.y)
            return false;
    }
    return false;
}

/// Classification thresholds: polished gradients must reach kGradTol, and
/// Hessian eigenvalues within kDegenerateTol of zero mark the type as
/// untrustworthy.
inline constexpr double kGradTol = 1e-8;
inline constexpr double kDegenerateTol = 1e-8;

template <DriftModel2D M>
Extremum classify_extremum(const M& model, Vec2 x, bool refined) {
    Extremum e;
    e.x = x;
    e.value = drift_norm2(model, x);
    e.refined = refined;
    const SymEig2 eig = eigen_sym2(norm_hessian(model, x));
    e.lambda[0] = eig.lambda[0];
    e.lambda[1] = eig.lambda[1];
    e.degenerate = std::min(std::abs(eig.lambda[0]), std::abs(eig.lambda[1])) <
                   kDegenerateTol;
    if (eig.lambda[1] > 0.0)
        e.type = ExtremumType::minimum;
    else if (eig.lambda[0] < 0.0)
        e.type = ExtremumType::maximum;
    else
        e.type = ExtremumType::saddle;
    return e;
}

/// Sample |f|^2_G on the grid.  Spinning chart models additionally get the
/// lowest-order split of the norm into precessional and drive terms.
template <DriftModel2D M>
NormLandscape norm_grid(const M& model, const GridSpec& grid) {
    if (grid.nx < 2 || grid.ny < 2)
        throw std::invalid_argument("norm_grid: need at least a 2x2 grid");
    NormLandscape L;
    L.grid = grid;
    const std::size_t n =
        static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny);
    L.values.resize(n);
    constexpr bool spinning = requires(const M& m, Vec2 q) {
        m.spin.dynamics(m.chart.embed(q));
        m.spin.prm.I;
    };
    if constexpr (spinning) {
        L.precessional.resize(n);
        L.nongradient.resize(n);
    }
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const Vec2 x = grid.node(i, j);
            if constexpr (requires(const M& m, Vec2 q) { m.in_domain(q); }) {
                if (!model.in_domain(x))
                    throw std::domain_error(
                        "norm_grid: grid node outside the chart domain");
            }
            const std::size_t idx =
                static_cast<std::size_t>(i) + static_cast<std::size_t>(grid.nx) * j;
            L.values[idx] = drift_norm2(model, x);
            if constexpr (spinning) {
                const Vec3 m = model.chart.embed(x);
                const Vec3 mxh = cross(m, model.spin.field(m));
                L.precessional[idx] = dot(mxh, mxh);
                L.nongradient[idx] = 2.0 * model.spin.prm.alpha *
                                     model.spin.prm.I *
                                     dot(model.spin.polarizer(), mxh);
            }
        }
    }
    return L;
}

/// Locate and classify the critical points of a sampled norm surface.
/// Candidates come from grid cells where both gradient components change
/// sign; each is polished by Newton iteration on the analytic gradient.
/// Candidates whose polish diverges are kept with the unrefined flag.
template <DriftModel2D M>
const std::vector<Extremum>& find_and_classify_extrema(const M& model,
                                                       NormLandscape& L) {
    const GridSpec& grid = L.grid;
    const std::size_t nx = static_cast<std::size_t>(grid.nx);
    std::vector<Vec2> gradients(nx * static_cast<std::size_t>(grid.ny));
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            gradients[i + nx * j] = norm_gradient(model, grid.node(i, j));

    const Vec2 h = grid.spacing();
    const double max_step = 2.0 * std::max(h.x, h.y);
    const double merge_r = 0.5 * std::min(h.x, h.y);

    std::vector<Extremum>& out = L.extrema;
    out.clear();
    auto already_have = [&](Vec2 x) {
        for (const Extremum& e : out)
            if (std::hypot(e.x.x - x.x, e.x.y - x.y) < merge_r)
                return true;
        return false;
    };

    for (int j = 0; j + 1 < grid.ny; ++j) {
        for (int i = 0; i + 1 < grid.nx; ++i) {
            const Vec2 g00 = gradients[i + nx * j];
            const Vec2 g10 = gradients[i + 1 + nx * j];
            const Vec2 g01 = gradients[i + nx * (j + 1)];
            const Vec2 g11 = gradients[i + 1 + nx * (j + 1)];
            const double xmin = std::min({g00.x, g10.x, g01.x, g11.x});
            const double xmax = std::max({g00.x, g10.x, g01.x, g11.x});
            const double ymin = std::min({g00.y, g10.y, g01.y, g11.y});
            const double ymax = std::max({g00.y, g10.y, g01.y, g11.y});
            if (xmin > 0.0 || xmax < 0.0 || ymin > 0.0 || ymax < 0.0)
                continue;
            Vec2 c = 0.5 * (grid.node(i, j) + grid.node(i + 1, j + 1));
            const bool ok =
                polish_extremum(model, c, grid.lo, grid.hi, max_step, kGradTol);
            if (already_have(c))
                continue;
            out.push_back(classify_extremum(model, c, ok));
        }
    }
    std::sort(out.begin(), out.end(), [](const Extremum& a, const Extremum& b) {
        return a.x.x != b.x.x ? a.x.x < b.x.x : a.x.y < b.x.y;
    });
    return out;
}

/// One probe of the tracked critical point during a parameter scan.
struct BifurcationStep {
    double param = 0.0;
    bool tracked = false;
    Extremum extremum;
};

struct BifurcationResult {
    std::vector<BifurcationStep> steps;
    bool found = false;
    double lo = 0.0;         // bracketing parameter interval of the flip
    double hi = 0.0;
    double threshold = 0.0;  // bisection estimate inside [lo, hi]
};

/// Scan a one-parameter model family, tracking a critical point of the norm
/// surface by continuation from track_start, and report where its leading
/// Hessian eigenvalue changes sign (a saddle of the norm flipping to a local
/// maximum).  The bracketing scan interval is refined by bisection on that
/// eigenvalue's sign down to p_tol.
template <typename Family>
BifurcationResult bifurcation_scan(Family&& family, Vec2 track_start,
                                   double p_lo, double p_hi, int steps,
                                   double p_tol = 1e-3) {
    if (steps < 2 || !(p_hi > p_lo))
        throw std::invalid_argument("bifurcation_scan: bad parameter range");
    BifurcationResult out;
    const Vec2 lo{track_start.x - 0.5, track_start.y - 0.5};
    const Vec2 hi{track_start.x + 0.5, track_start.y + 0.5};

    auto probe = [&](double p, Vec2 seed) {
        BifurcationStep st;
        st.param = p;
        Vec2 x = seed;
        const auto model = family(p);
        st.tracked = polish_extremum(model, x, lo, hi, 0.1, kGradTol);
        if (st.tracked)
            st.extremum = classify_extremum(model, x, true);
        return st;
    };

    Vec2 seed = track_start;
    for (int k = 0; k < steps; ++k) {
        const double p = p_lo + (p_hi - p_lo) * k / (steps - 1.0);
        BifurcationStep st = probe(p, seed);
        if (st.tracked)
            seed = st.extremum.x;
        out.steps.push_back(st);
    }

    for (std::size_t k = 1; k < out.steps.size(); ++k) {
        const BifurcationStep& a = out.steps[k - 1];
        const BifurcationStep& b = out.steps[k];
        if (!a.tracked || !b.tracked)
            continue;
        if (a.extremum.lambda[0] > 0.0 && b.extremum.lambda[0] < 0.0) {
            out.found = true;
            out.lo = a.param;
            out.hi = b.param;
            seed = a.extremum.x;
            break;
        }
    }
    if (!out.found)
        return out;

    while (out.hi - out.lo > p_tol) {
        const double mid = 0.5 * (out.lo + out.hi);
        const BifurcationStep st = probe(mid, seed);
        if (!st.tracked)
            break;
        seed = st.extremum.x;
        if (st.extremum.lambda[0] > 0.0)
            out.lo = mid;
        else
            out.hi = mid;
    }
    out.threshold = 0.5 * (out.lo + out.hi);
    return out;
}

}  // namespace fwescape
