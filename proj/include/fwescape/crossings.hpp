#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "fwescape/drift_model.hpp"
#include "fwescape/trajectory.hpp"
#include "fwescape/vec.hpp"

namespace fwescape {

/// One transversal intersection between two escape paths: the same
/// configuration point reached with visibly different momenta.  Folding of
/// the escape manifold (a caustic) shows up as exactly this signature.
struct Crossing {
    std::size_t traj_a = 0;
    std::size_t traj_b = 0;
    std::size_t seg_a = 0;  // points[seg_a] .. points[seg_a + 1] on traj_a
    std::size_t seg_b = 0;
    Vec2 x{};               // chart coordinates of the meeting point
    Vec3 m{};               // embedded point for spherical charts
    bool has_m = false;
    double separation = 0.0;         // residual configuration-space gap
    double momentum_mismatch = 0.0;  // norm of the branch momentum difference
    double cross_sin = 0.0;          // sine of the angle between the branches
};

struct CrossingReport {
    std::vector<Crossing> crossings;
    double match_tol = 0.0;
    double momentum_tol = 0.0;

    bool empty() const { return crossings.empty(); }
    std::size_t size() const { return crossings.size(); }
};

/// Largest drift norm seen along a set of recorded paths; the conventional
/// momentum-distinctness tolerance is one percent of this scale.
template <typename Model>
double momentum_scale(const Model& model, const std::vector<Trajectory>& trajs) {
    double fmax = 0.0;
    for (const auto& t : trajs)
        for (const auto& q : t.points)
            fmax = std::max(fmax, std::sqrt(drift_norm2(model, q.x)));
    return fmax;
}

/// Momentum scale restricted to members that completed an escape, preferring
/// arrivals at the target fixed point, then separatrix exits.  Members
/// truncated at the domain boundary (or separatrix exits far from the
/// target) sample the drift far outside the basin of interest and would
/// inflate the scale by orders of magnitude.
template <typename Model>
double escape_momentum_scale(const Model& model, const std::vector<Trajectory>& trajs) {
    std::vector<Trajectory> arrived;
    for (const auto& t : trajs)
        if (t.stop == StopReason::fixed_point)
            arrived.push_back(t);
    if (arrived.empty())
        for (const auto& t : trajs)
            if (t.stop == StopReason::separatrix)
                arrived.push_back(t);
    return momentum_scale(model, arrived.empty() ? trajs : arrived);
}

namespace detail {

/// Closest-point parameters (s, t) in [0,1]^2 between segments a0a1 and b0b1.
template <typename V>
inline void segment_closest(V a0, V a1, V b0, V b1, double& s, double& t) {
    const V d1 = a1 - a0;
    const V d2 = b1 - b0;
    const V r = a0 - b0;
    const double a = dot(d1, d1);
    const double e = dot(d2, d2);
    const double f = dot(d2, r);
    const double c = dot(d1, r);
    const double b = dot(d1, d2);
    const double denom = a * e - b * b;
    s = denom > 1e-30 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
    t = e > 1e-30 ? (b * s + f) / e : 0.0;
    if (t < 0.0) {
        t = 0.0;
        s = a > 1e-30 ? std::clamp(-c / a, 0.0, 1.0) : 0.0;
    } else if (t > 1.0) {
        t = 1.0;
        s = a > 1e-30 ? std::clamp((b - c) / a, 0.0, 1.0) : 0.0;
    }
}

struct SegRef {
    std::uint32_t traj;
    std::uint32_t seg;
};

struct CellKey {
    std::int64_t ix, iy, iz;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const {
        const std::uint64_t h = static_cast<std::uint64_t>(k.ix) * 73856093u ^
                                static_cast<std::uint64_t>(k.iy) * 19349663u ^
                                static_cast<std::uint64_t>(k.iz) * 83492791u;
        return static_cast<std::size_t>(h);
    }
};

inline Vec3 seg_point(const TrajectoryPoint& q) {
    return q.has_m ? q.m : Vec3{q.x.x, q.x.y, 0.0};
}

}  // namespace detail

/// Scan a family of recorded paths for pairwise transversal intersections.
/// Two polyline segments meet when their configuration-space distance is at
/// most `match_tol` (measured on the embedded sphere for spherical charts)
/// and the momenta of the two branches there differ by at least
/// `momentum_tol`, which excludes tangencies and the common approach into a
/// target point, where all branches carry the same momentum.  Two structural
/// exclusions handle the remaining degeneracies: points of the same path
/// closer than `self_arc_gap` along the path never pair up (recorded samples
/// can be much denser than the match tolerance), and meetings where both
/// branch points are still within `seed_arc_gap` of their own starting
/// points are dropped whether or not they belong to the same member (fan
/// members share the seed neighborhood by construction, and spiral seeds
/// revisit it many times below the detector's resolution).
/// Negative gaps select the defaults 10x and 20x match_tol.  Crossings must
/// also be transversal: the sine of the angle between the local branch
/// tangents must reach `tangency_sin`, which removes adjacent members that
/// merely shadow each other inside the match tolerance over a long arc.  A
/// single path is scanned against itself.  Results are ordered by (traj_a,
/// traj_b, seg_a) so reports are reproducible.
inline CrossingReport detect_crossings(const std::vector<Trajectory>& trajs,
                                       double match_tol = 1e-3,
                                       double momentum_tol = 1e-2,
                                       double self_arc_gap = -1.0,
                                       double seed_arc_gap = -1.0,
                                       double tangency_sin = 0.02) {
    CrossingReport report;
    report.match_tol = match_tol;
    report.momentum_tol = momentum_tol;
    if (self_arc_gap < 0.0)
        self_arc_gap = 10.0 * match_tol;
    if (seed_arc_gap < 0.0)
        seed_arc_gap = 20.0 * match_tol;

    std::vector<detail::SegRef> segs;
    std::vector<std::vector<double>> arc(trajs.size());
    double extent_sum = 0.0;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        const auto& pts = trajs[i].points;
        arc[i].resize(pts.size(), 0.0);
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            segs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k)});
            const Vec3 d = detail::seg_point(pts[k + 1]) - detail::seg_point(pts[k]);
            arc[i][k + 1] = arc[i][k] + norm(d);
            extent_sum += std::max({std::abs(d.x), std::abs(d.y), std::abs(d.z)});
        }
    }
    if (segs.empty())
        return report;

    const double cell = std::max(4.0 * match_tol, 2.0 * extent_sum / segs.size());
    std::unordered_map<detail::CellKey, std::vector<std::uint32_t>, detail::CellHash> grid;
    grid.reserve(2 * segs.size());

    auto cell_range = [&](const Vec3& a, const Vec3& b, std::int64_t lo[3], std::int64_t hi[3]) {
        const double pad = match_tol;
        const double mn[3] = {std::min(a.x, b.x) - pad, std::min(a.y, b.y) - pad,
                              std::min(a.z, b.z) - pad};
        const double mx[3] = {std::max(a.x, b.x) + pad, std::max(a.y, b.y) + pad,
                              std::max(a.z, b.z) + pad};
        for (int d = 0; d < 3; ++d) {
            lo[d] = static_cast<std::int64_t>(std::floor(mn[d] / cell));
            hi[d] = static_cast<std::int64_t>(std::floor(mx[d] / cell));
        }
    };

    for (std::uint32_t s = 0; s < segs.size(); ++s) {
        const auto& pts = trajs[segs[s].traj].points;
        std::int64_t lo[3], hi[3];
        cell_range(detail::seg_point(pts[segs[s].seg]), detail::seg_point(pts[segs[s].seg + 1]),
                   lo, hi);
        for (std::int64_t ix = lo[0]; ix <= hi[0]; ++ix)
            for (std::int64_t iy = lo[1]; iy <= hi[1]; ++iy)
                for (std::int64_t iz = lo[2]; iz <= hi[2]; ++iz)
                    grid[{ix, iy, iz}].push_back(s);
    }

    // Candidate pairs are tested cell by cell instead of being materialized
    // and deduplicated globally: spiral seeds pile thousands of segments
    // into the core cells and the full pair list does not fit in memory.
    // Within a bucket, segments still inside the seed zone are partitioned
    // to the back so the (quadratically many) core-core pairs are skipped
    // wholesale; a pair meeting in several shared cells merely produces
    // duplicate candidates, which the location merge below collapses.
    std::vector<Crossing> raw;
    auto consider = [&](std::uint32_t ka, std::uint32_t kb) {
        const detail::SegRef sa = segs[std::min(ka, kb)];
        const detail::SegRef sb = segs[std::max(ka, kb)];
        if (sa.traj == sb.traj &&
            std::abs(arc[sa.traj][sa.seg] - arc[sb.traj][sb.seg]) <= self_arc_gap)
            return;  // nearby samples of one path, not a revisit
        if (arc[sa.traj][sa.seg] <= seed_arc_gap &&
            arc[sb.traj][sb.seg] <= seed_arc_gap)
            return;  // both branches still inside the shared seed zone
        const auto& pa = trajs[sa.traj].points;
        const auto& pb = trajs[sb.traj].points;
        const Vec3 a0 = detail::seg_point(pa[sa.seg]);
        const Vec3 a1 = detail::seg_point(pa[sa.seg + 1]);
        const Vec3 b0 = detail::seg_point(pb[sb.seg]);
        const Vec3 b1 = detail::seg_point(pb[sb.seg + 1]);
        double s = 0.0, t = 0.0;
        detail::segment_closest(a0, a1, b0, b1, s, t);
        const Vec3 ca = a0 + s * (a1 - a0);
        const Vec3 cb = b0 + t * (b1 - b0);
        const double d = norm(ca - cb);
        if (d > match_tol)
            return;

        const double la = norm(a1 - a0);
        const double lb = norm(b1 - b0);
        if (la == 0.0 || lb == 0.0)
            return;
        const double sin_angle = norm(cross(a1 - a0, b1 - b0)) / (la * lb);
        if (sin_angle < tangency_sin)
            return;

        const bool spherical = pa[sa.seg].has_m;
        double mismatch = 0.0;
        if (spherical) {
            const Vec3 qa = pa[sa.seg].pm + s * (pa[sa.seg + 1].pm - pa[sa.seg].pm);
            const Vec3 qb = pb[sb.seg].pm + t * (pb[sb.seg + 1].pm - pb[sb.seg].pm);
            mismatch = norm(qa - qb);
        } else {
            const Vec2 qa = pa[sa.seg].p + s * (pa[sa.seg + 1].p - pa[sa.seg].p);
            const Vec2 qb = pb[sb.seg].p + t * (pb[sb.seg + 1].p - pb[sb.seg].p);
            mismatch = norm(qa - qb);
        }
        if (mismatch < momentum_tol)
            return;

        Crossing c;
        c.traj_a = sa.traj;
        c.traj_b = sb.traj;
        c.seg_a = sa.seg;
        c.seg_b = sb.seg;
        c.x = pa[sa.seg].x + s * (pa[sa.seg + 1].x - pa[sa.seg].x);
        c.m = 0.5 * (ca + cb);
        c.has_m = spherical;
        c.separation = d;
        c.momentum_mismatch = mismatch;
        c.cross_sin = sin_angle;
        raw.push_back(c);
    };

    std::vector<std::uint32_t> outer;
    for (auto& [key, bucket] : grid) {
        (void)key;
        outer.clear();
        std::size_t n_core = 0;
        for (const std::uint32_t s : bucket) {
            if (arc[segs[s].traj][segs[s].seg] > seed_arc_gap)
                outer.push_back(s);
            else
                ++n_core;
        }
        if (outer.empty())
            continue;
        for (std::size_t u = 0; u < outer.size(); ++u)
            for (std::size_t v = u + 1; v < outer.size(); ++v)
                consider(outer[u], outer[v]);
        if (n_core == 0)
            continue;
        for (const std::uint32_t s : bucket) {
            if (arc[segs[s].traj][segs[s].seg] > seed_arc_gap)
                continue;
            for (const std::uint32_t o : outer)
                consider(s, o);
        }
    }

    std::sort(raw.begin(), raw.end(), [](const Crossing& a, const Crossing& b) {
        if (a.traj_a != b.traj_a) return a.traj_a < b.traj_a;
        if (a.traj_b != b.traj_b) return a.traj_b < b.traj_b;
        if (a.seg_a != b.seg_a) return a.seg_a < b.seg_a;
        return a.seg_b < b.seg_b;
    });

    // One geometric crossing straddles a handful of adjacent segment pairs;
    // merge candidates of the same trajectory pair whose meeting points sit
    // within a few tolerances of each other, keeping the tightest one.
    const double merge_r = 10.0 * match_tol;
    for (std::size_t k = 0; k < raw.size(); ++k) {
        bool merged = false;
        for (auto& kept : report.crossings) {
            if (kept.traj_a != raw[k].traj_a || kept.traj_b != raw[k].traj_b)
                continue;
            if (norm(kept.m - raw[k].m) <= merge_r) {
                if (raw[k].separation < kept.separation)
                    kept = raw[k];
                merged = true;
                break;
            }
        }
        if (!merged)
            report.crossings.push_back(raw[k]);
    }
    return report;
}

}  // namespace fwescape
