#pragma once

// Command-level pipelines shared by the command line driver and the
// acceptance suite.  Each run_* function executes one workflow on a parsed
// RunConfig and returns the raw results together with a JSON summary that
// embeds the fully resolved configuration; the matching write_*_files helper
// emits the fixed file set for that command into a directory.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fwescape/config.hpp"
#include "fwescape/crossings.hpp"
#include "fwescape/csv.hpp"
#include "fwescape/landscape.hpp"
#include "fwescape/langevin.hpp"
#include "fwescape/models/double_well.hpp"
#include "fwescape/models/macrospin.hpp"
#include "fwescape/models/maier_stein.hpp"
#include "fwescape/shoot.hpp"
#include "fwescape/stats.hpp"
#include "fwescape/uniaxial.hpp"

namespace fwescape {

inline models::MacrospinChart make_macrospin(const ModelConfig& mc,
                                             models::SphericalChart chart) {
    return {{{mc.alpha, mc.D, mc.I, mc.omega}}, chart};
}

namespace detail {

inline json summary_shell(const RunConfig& rc) {
    return json{{"format_version", kFormatVersion},
                {"command", rc.command},
                {"config", resolved_config(rc)}};
}

inline json trajectory_record(const Trajectory& t) {
    json j;
    j["stop"] = to_string(t.stop);
    j["points"] = t.points.size();
    j["action"] = t.final_action();
    j["max_h_resid"] = t.max_h_resid();
    if (!t.points.empty()) {
        const auto& q = t.points.back();
        j["end"] = {q.x.x, q.x.y};
        j["arc_length"] = q.s;
    }
    return j;
}

inline json oracle_record(const OracleComparison& oc) {
    return json{{"rms", oc.rms},
                {"max_abs", oc.max_abs},
                {"gauge", oc.gauge},
                {"orientation", oc.orientation},
                {"I_eff", oc.I_eff},
                {"n_points", oc.n_points},
                {"window_restricted", oc.window_restricted}};
}

inline double max_abs_second_coord(const Trajectory& t) {
    double w = 0.0;
    for (const auto& q : t.points) w = std::max(w, std::abs(q.x.y));
    return w;
}

inline std::ofstream open_output(const std::filesystem::path& dir,
                                 const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / name, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open output file '" +
                                 (dir / name).string() + "'");
    return os;
}

inline void write_summary_json(const std::filesystem::path& dir,
                               const json& summary) {
    auto os = open_output(dir, "summary.json");
    os << summary.dump(2) << '\n';
}

inline std::string numbered_name(const char* stem, std::size_t k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03zu.csv", stem, k);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// instanton: fan of zero-energy shots out of the stable point, crossing
// detection, saddle refinement for the planar models, closed-form comparison
// for the easy-axis macrospin.

struct InstantonRun {
    FanResult fan;
    CrossingReport crossings;
    std::vector<RefinedHit> hits;
    std::optional<OracleComparison> oracle;
    json summary;
};

namespace detail {

/// Shared summary assembly.  `end_energy` (optional) maps a chart point to
/// the anisotropy energy so spherical runs can report where each shot ended
/// relative to the separatrix.
inline void fill_instanton_summary(InstantonRun& run, const RunConfig& rc,
                                   const std::function<double(Vec2)>& end_energy) {
    json res;
    res["seed_mode"] = run.fan.used_mode == SeedMode::linear_modes
                           ? "linear_modes"
                           : "gamma_fan";
    json fan_table = json::array();
    for (std::size_t k = 0; k < run.fan.trajectories.size(); ++k) {
        json row = trajectory_record(run.fan.trajectories[k]);
        row["chi"] = run.fan.seeds[k].chi;
        if (end_energy && !run.fan.trajectories[k].points.empty())
            row["end_energy"] =
                end_energy(run.fan.trajectories[k].points.back().x);
        fan_table.push_back(std::move(row));
    }
    res["fan"] = std::move(fan_table);

    json xs = json::array();
    for (const auto& c : run.crossings.crossings)
        xs.push_back({{"x", c.x.x},
                      {"y", c.x.y},
                      {"traj_a", c.traj_a},
                      {"traj_b", c.traj_b},
                      {"separation", c.separation},
                      {"momentum_mismatch", c.momentum_mismatch}});
    res["crossings"] = std::move(xs);
    res["crossing_count"] = run.crossings.size();

    json hits = json::array();
    int best = -1;
    for (std::size_t k = 0; k < run.hits.size(); ++k) {
        const auto& h = run.hits[k];
        hits.push_back({{"chi", h.chi},
                        {"action", h.trajectory.final_action()},
                        {"max_abs_second_coord",
                         max_abs_second_coord(h.trajectory)}});
        if (best < 0 || h.trajectory.final_action() <
                            run.hits[best].trajectory.final_action())
            best = static_cast<int>(k);
    }
    res["hits"] = std::move(hits);
    if (best >= 0) {
        const auto& h = run.hits[best];
        res["optimal_action"] = h.trajectory.final_action();
        res["optimal_chi"] = h.chi;
        res["optimal_max_abs_second_coord"] =
            max_abs_second_coord(h.trajectory);
    } else {
        // no refinable target: report the cheapest shot that reached the
        // separatrix
        double s_best = 0.0;
        bool have = false;
        for (const auto& t : run.fan.trajectories) {
            if (t.stop != StopReason::separatrix &&
                t.stop != StopReason::fixed_point)
                continue;
            if (!have || t.final_action() < s_best) {
                s_best = t.final_action();
                have = true;
            }
        }
        if (have) res["optimal_action"] = s_best;
    }
    if (run.oracle) res["oracle"] = oracle_record(*run.oracle);

    run.summary = summary_shell(rc);
    run.summary["results"] = std::move(res);
}

/// Fan members seeded on a complex (spiral) escape plane wind around the
/// fixed point many times before separating by more than the match
/// tolerance; crossing candidates inside that wound-up core are below the
/// detector's resolution.  The linearized pitch reaches match_tol at radius
/// r* = tol |Im l| / (2 pi |Re l|) after an arc of (|Im l| / |Re l|) r*;
/// the returned seed-zone arc pads that by 2x (capped at a fifth of the
/// longest member).  Real modes keep the library default.
inline double spiral_seed_gap(const FixedPointModes& modes, double match_tol,
                              const std::vector<Trajectory>& trajs) {
    if (!modes.complex_pair) return -1.0;
    const double re = std::abs(modes.lambda[0].real());
    const double im = std::abs(modes.lambda[0].imag());
    if (!(re > 0.0) || im <= 2.0 * re) return -1.0;
    const double gap = match_tol * im * im / (M_PI * re * re);
    double smax = 0.0;
    for (const auto& t : trajs)
        if (!t.points.empty()) smax = std::max(smax, t.points.back().s);
    return std::min(gap, 0.2 * smax);
}

template <DriftModel2D M>
InstantonRun instanton_planar(const RunConfig& rc, const M& model,
                              Vec2 start_guess, Vec2 saddle) {
    const auto x_star = find_fixed_point(model, start_guess);
    if (!x_star)
        throw std::runtime_error("instanton: no stable point near start");

    ShootingConfig cfg = rc.solver.shooting();
    cfg.stops.push_back(stop_ball(saddle, 1e-4));
    cfg.stops.push_back(stop_coord0_below(saddle.x));
    cfg.stops.push_back(stop_box({-2.5, -2.5}, {2.5, 2.5}));

    FanConfig fc;
    fc.fan_size = rc.solver.fan;
    fc.seed_radius = rc.solver.seed_radius;
    fc.gamma_skip_band = rc.solver.gamma_skip_band;

    InstantonRun run;
    run.fan = fan_shoot(model, *x_star, fc, cfg);

    const double scale = escape_momentum_scale(model, run.fan.trajectories);
    run.crossings = detect_crossings(run.fan.trajectories, rc.solver.match_tol,
                                     rc.solver.momentum_tol_factor * scale);

    if (run.fan.used_mode == SeedMode::linear_modes) {
        std::vector<double> chis;
        for (const auto& s : run.fan.seeds) chis.push_back(s.chi);
        auto reshoot = [&](double chi) {
            const auto seed =
                linear_mode_seed(model, run.fan.modes, chi, fc.seed_radius);
            return seed ? shoot(model, seed->x, seed->p, cfg) : Trajectory{};
        };
        run.hits = refine_fan_hits(chis, run.fan.trajectories, saddle, reshoot);
    }
    fill_instanton_summary(run, rc, {});
    return run;
}

inline InstantonRun instanton_macrospin(const RunConfig& rc) {
    const auto model =
        make_macrospin(rc.model, models::SphericalChart::x_pole());
    const auto x_star = find_fixed_point(model, {M_PI / 2, M_PI / 2});
    if (!x_star)
        throw std::runtime_error("instanton: no stable point in the +z basin");

    ShootingConfig cfg = rc.solver.shooting();
    for (auto& s : stop_pole_band(1e-3)) cfg.stops.push_back(std::move(s));
    const auto energy_of = [m = model](Vec2 x) {
        return m.spin.energy(m.chart.embed(x));
    };
    cfg.stops.push_back(stop_field_rises(
        [energy_of, margin = rc.solver.sep_margin](Vec2 x) {
            return energy_of(x) + margin;
        }));

    FanConfig fc;
    fc.fan_size = rc.solver.fan;
    fc.seed_radius = rc.solver.seed_radius;
    fc.gamma_skip_band = rc.solver.gamma_skip_band;

    InstantonRun run;
    run.fan = fan_shoot(model, *x_star, fc, cfg);

    const double scale = escape_momentum_scale(model, run.fan.trajectories);
    const double seed_gap = spiral_seed_gap(run.fan.modes, rc.solver.match_tol,
                                            run.fan.trajectories);
    run.crossings =
        detect_crossings(run.fan.trajectories, rc.solver.match_tol,
                         rc.solver.momentum_tol_factor * scale, -1.0, seed_gap);

    if (rc.model.D == 0.0) {
        // easy axis: compare the longest separatrix shot to the closed form
        const Trajectory* pick = nullptr;
        for (const auto& t : run.fan.trajectories) {
            if (t.stop != StopReason::separatrix) continue;
            if (!pick || t.points.size() > pick->points.size()) pick = &t;
        }
        if (pick) {
            const bool tilted = rc.model.omega != 0.0;
            run.oracle = compare_to_oracle(*pick, rc.model.alpha, rc.model.I,
                                           tilted, rc.model.omega, 0.1, 0.05,
                                           tilted);
        }
    }
    fill_instanton_summary(run, rc, energy_of);
    if (seed_gap > 0.0) run.summary["results"]["seed_arc_gap"] = seed_gap;
    return run;
}

}  // namespace detail

inline InstantonRun run_instanton(const RunConfig& rc) {
    if (rc.model.name == "maier_stein")
        return detail::instanton_planar(rc, models::MaierStein{rc.model.alpha},
                                        {1.0, 0.0}, {0.0, 0.0});
    if (rc.model.name == "double_well")
        return detail::instanton_planar(rc, models::DoubleWell{}, {1.0, 0.0},
                                        {0.0, 0.0});
    return detail::instanton_macrospin(rc);
}

inline void write_instanton_files(const InstantonRun& run,
                                  const std::filesystem::path& dir) {
    detail::write_summary_json(dir, run.summary);
    for (std::size_t k = 0; k < run.fan.trajectories.size(); ++k) {
        auto os = detail::open_output(dir, detail::numbered_name("fan", k));
        write_trajectory_csv(os, run.fan.trajectories[k]);
    }
    for (std::size_t k = 0; k < run.hits.size(); ++k) {
        auto os = detail::open_output(dir, detail::numbered_name("hit", k));
        write_trajectory_csv(os, run.hits[k].trajectory);
    }
}

// ---------------------------------------------------------------------------
// norm-map: drift-norm landscape on a grid plus the critical-point census.

struct NormMapRun {
    NormLandscape landscape;
    json summary;
};

namespace detail {

inline json extremum_record(const Extremum& e) {
    return json{{"x", e.x.x},          {"y", e.x.y},
                {"value", e.value},    {"type", to_string(e.type)},
                {"lambda1", e.lambda[0]}, {"lambda2", e.lambda[1]},
                {"refined", e.refined},   {"degenerate", e.degenerate}};
}

template <DriftModel2D M>
NormMapRun norm_map_on(const RunConfig& rc, const M& model) {
    NormMapRun run;
    const GridSpec grid{rc.grid.lo, rc.grid.hi, rc.grid.nx, rc.grid.ny};
    run.landscape = norm_grid(model, grid);
    find_and_classify_extrema(model, run.landscape);

    json res;
    json table = json::array();
    int minima = 0, saddles = 0, maxima = 0;
    for (const auto& e : run.landscape.extrema) {
        table.push_back(extremum_record(e));
        if (e.type == ExtremumType::minimum) ++minima;
        if (e.type == ExtremumType::saddle) ++saddles;
        if (e.type == ExtremumType::maximum) ++maxima;
    }
    res["extrema"] = std::move(table);
    res["minima"] = minima;
    res["saddles"] = saddles;
    res["maxima"] = maxima;
    run.summary = summary_shell(rc);
    run.summary["results"] = std::move(res);
    return run;
}

}  // namespace detail

inline NormMapRun run_norm_map(const RunConfig& rc) {
    if (rc.model.name == "maier_stein")
        return detail::norm_map_on(rc, models::MaierStein{rc.model.alpha});
    if (rc.model.name == "double_well")
        return detail::norm_map_on(rc, models::DoubleWell{});
    // spherical chart with theta measured from +z; the grid block must stay
    // inside (0, pi) x phi
    return detail::norm_map_on(
        rc, make_macrospin(rc.model, models::SphericalChart::z_pole()));
}

inline void write_norm_map_files(const NormMapRun& run,
                                 const std::filesystem::path& dir) {
    detail::write_summary_json(dir, run.summary);
    {
        auto os = detail::open_output(dir, "grid.csv");
        write_grid_csv(os, run.landscape);
    }
    {
        auto os = detail::open_output(dir, "extrema.csv");
        write_extrema_csv(os, run.landscape.extrema);
    }
}

// ---------------------------------------------------------------------------
// bifurcation: continuation of the on-axis saddle of the planar bistable
// family, reporting where its transverse curvature changes sign.

struct BifurcationRun {
    BifurcationResult scan;
    json summary;
};

inline BifurcationRun run_bifurcation(const RunConfig& rc) {
    if (rc.model.name != "maier_stein")
        throw std::invalid_argument(
            "bifurcation: only the planar bistable family has a scan "
            "parameter");
    BifurcationRun run;
    const auto& b = rc.bifurcation;
    run.scan = bifurcation_scan([](double p) { return models::MaierStein{p}; },
                                {1.0 / std::sqrt(3.0), 0.0}, b.param_lo,
                                b.param_hi, b.steps, b.param_tol);
    json res;
    json steps = json::array();
    for (const auto& st : run.scan.steps) {
        json row{{"param", st.param}, {"tracked", st.tracked}};
        if (st.tracked) row.update(detail::extremum_record(st.extremum));
        steps.push_back(std::move(row));
    }
    res["steps"] = std::move(steps);
    res["found"] = run.scan.found;
    if (run.scan.found) {
        res["lo"] = run.scan.lo;
        res["hi"] = run.scan.hi;
        res["threshold"] = run.scan.threshold;
    }
    run.summary = detail::summary_shell(rc);
    run.summary["results"] = std::move(res);
    return run;
}

inline void write_bifurcation_files(const BifurcationRun& run,
                                    const std::filesystem::path& dir) {
    detail::write_summary_json(dir, run.summary);
    auto os = detail::open_output(dir, "scan.csv");
    write_bifurcation_csv(os, run.scan);
}

// ---------------------------------------------------------------------------
// langevin: direct noisy simulation.  Planar models run escape ensembles
// with section statistics; the undriven macrospin runs the stationary-law
// check instead.

struct LangevinRun {
    EscapeSummary escapes;
    std::optional<StationaryCheck> stationary;
    std::optional<BimodalityReport> section_stats;
    json summary;
};

namespace detail {

template <DriftModel2D M>
void langevin_planar(LangevinRun& run, const RunConfig& rc, const M& model,
                     json& res) {
    if (!rc.langevin.stop_x_below)
        throw std::invalid_argument(
            "langevin: planar escape runs need 'langevin.stop_x_below'");
    run.escapes = simulate_escapes(model, rc.langevin.sim(rc.seed));

    res["realizations"] = run.escapes.realizations;
    res["escapes"] = run.escapes.events.size();
    res["censored"] = run.escapes.censored;
    res["eps_noise"] = run.escapes.eps_noise;
    if (!run.escapes.events.empty()) {
        double tsum = 0.0;
        for (const auto& e : run.escapes.events) tsum += e.exit_time;
        res["mean_exit_time"] = tsum / run.escapes.events.size();
    }

    std::vector<double> ys;
    for (const auto& e : run.escapes.events)
        if (e.section_y) ys.push_back(*e.section_y);
    if (!ys.empty()) {
        json sec;
        sec["count"] = ys.size();
        const double mu = mean_of(ys, 0, ys.size());
        sec["mean"] = mu;
        if (ys.size() > 1)
            sec["stddev"] = std::sqrt(var_of(ys, 0, ys.size(), mu));
        if (ys.size() >= 8) {
            run.section_stats = bimodality_test(
                ys, 400, derive_stream_seed(rc.seed, 0xb1d0));
            sec["separation"] = run.section_stats->separation;
            sec["null_mean"] = run.section_stats->null_mean;
            sec["p_value"] = run.section_stats->p_value;
            sec["bimodal"] = run.section_stats->bimodal();
        }
        res["section"] = std::move(sec);
    }
}

}  // namespace detail

inline LangevinRun run_langevin(const RunConfig& rc) {
    LangevinRun run;
    json res;
    if (rc.model.name == "macrospin") {
        if (rc.model.I != 0.0 || rc.model.D != 0.0)
            throw std::invalid_argument(
                "langevin: the spin simulation checks the stationary law and "
                "needs I = 0, D = 0");
        const models::Macrospin spin{{rc.model.alpha, 0.0, 0.0, 0.0}};
        run.stationary = sllgs_stationary_check(
            spin, rc.langevin.eps_noise, rc.langevin.dt, rc.langevin.burn_in,
            rc.langevin.samples, rc.langevin.stride, rc.seed);
        res["stationary_check"] = {{"d", run.stationary->d},
                                   {"p_value", run.stationary->p_value},
                                   {"mean_energy", run.stationary->mean_energy},
                                   {"n", run.stationary->n}};
    } else if (rc.model.name == "maier_stein") {
        detail::langevin_planar(run, rc, models::MaierStein{rc.model.alpha},
                                res);
    } else {
        detail::langevin_planar(run, rc, models::DoubleWell{}, res);
    }
    run.summary = detail::summary_shell(rc);
    run.summary["results"] = std::move(res);
    return run;
}

inline void write_langevin_files(const LangevinRun& run,
                                 const std::filesystem::path& dir) {
    detail::write_summary_json(dir, run.summary);
    if (!run.stationary) {
        auto os = detail::open_output(dir, "events.csv");
        write_events_csv(os, run.escapes);
    }
}

// ---------------------------------------------------------------------------
// oracle-check: one easy-axis escape shot against the closed forms.

struct OracleRun {
    Trajectory trajectory;
    OracleComparison oracle;
    double action = 0.0;               ///< measured shot action
    double action_segment = 0.0;       ///< closed form over the same segment
    double action_total = 0.0;         ///< closed form, pole to separatrix
    double action_head = 0.0;          ///< closed form, pole to seed
    json summary;
};

inline OracleRun run_oracle_check(const RunConfig& rc) {
    if (rc.model.name != "macrospin" || rc.model.D != 0.0)
        throw std::invalid_argument(
            "oracle-check: closed forms exist only for the easy-axis "
            "macrospin (D = 0)");
    if (!(rc.model.current_ratio > 0.0) || rc.model.current_ratio >= 1.0)
        throw std::invalid_argument(
            "oracle-check: needs a subcritical drive, 0 < current_ratio < 1");

    const double alpha = rc.model.alpha;
    const double omega = rc.model.omega;
    const double I = rc.model.I;
    const double I_eff = I * std::cos(omega);
    const double theta_star = std::acos(-I_eff);
    const bool tilted = omega != 0.0;

    OracleRun run;
    if (!tilted) {
        const auto model =
            make_macrospin(rc.model, models::SphericalChart::z_pole());
        const double th0 = std::max(rc.solver.seed_radius, 1e-6);
        const Vec2 x0{th0, 0.0};
        const Vec2 f = lower(model.drift(x0), model.metric(x0)).f;
        const Vec2 p0{-2.0 * f.x, 0.0};
        ShootingConfig cfg = rc.solver.shooting();
        cfg.stops.push_back(stop_coord0_above(theta_star - 1e-3));
        run.trajectory = shoot(model, x0, p0, cfg);
        run.oracle = compare_to_oracle(run.trajectory, alpha, I);
        run.action_head = analytic_uniaxial_action(th0, alpha, I);
    } else {
        const auto model =
            make_macrospin(rc.model, models::SphericalChart::x_pole());
        const auto xs = find_fixed_point(model, {M_PI / 2, M_PI / 2});
        if (!xs)
            throw std::runtime_error(
                "oracle-check: no stable point in the +z basin");
        const auto fp = linearize_fixed_point(model, *xs);
        const auto seed =
            linear_mode_seed(model, fp, 0.0, rc.solver.seed_radius);
        if (!seed)
            throw std::runtime_error("oracle-check: degenerate escape plane");
        ShootingConfig cfg = rc.solver.shooting();
        cfg.stops.push_back(stop_field_rises(
            [ch = model.chart, stop_at = theta_star - 0.02](Vec2 x) {
                return std::acos(std::clamp(ch.embed(x).z, -1.0, 1.0)) -
                       stop_at;
            }));
        run.trajectory = shoot(model, seed->x, seed->p, cfg);
        run.oracle = compare_to_oracle(run.trajectory, alpha, I, true, omega,
                                       0.1, 0.05, true);
    }

    run.action = run.trajectory.final_action();
    run.action_total = analytic_uniaxial_action(theta_star, alpha, I_eff);
    double theta_end = 0.0;
    if (!run.trajectory.points.empty()) {
        const auto& q = run.trajectory.points.back();
        const Vec3 m = run.trajectory.points.back().m;
        theta_end = q.has_m ? std::acos(std::clamp(m.z, -1.0, 1.0)) : q.x.x;
    }
    const double clamped = std::min(theta_end, theta_star);
    run.action_segment =
        analytic_uniaxial_action(clamped, alpha, I_eff) - run.action_head;

    json res;
    res["oracle"] = detail::oracle_record(run.oracle);
    res["trajectory"] = detail::trajectory_record(run.trajectory);
    res["action"] = run.action;
    res["action_head"] = run.action_head;
    res["action_segment"] = run.action_segment;
    res["action_total"] = run.action_total;
    res["theta_end"] = theta_end;
    res["theta_star"] = theta_star;
    res["I_eff"] = I_eff;
    run.summary = detail::summary_shell(rc);
    run.summary["results"] = std::move(res);
    return run;
}

inline void write_oracle_check_files(const OracleRun& run,
                                     const std::filesystem::path& dir) {
    detail::write_summary_json(dir, run.summary);
    auto os = detail::open_output(dir, "trajectory.csv");
    write_trajectory_csv(os, run.trajectory);
}

// ---------------------------------------------------------------------------

/// Execute one non-report command end to end and write its files under
/// rc.out_dir.  Returns the summary JSON.
inline json run_command(const RunConfig& rc) {
    const std::filesystem::path dir = rc.out_dir;
    if (rc.command == "instanton") {
        auto run = run_instanton(rc);
        write_instanton_files(run, dir);
        return run.summary;
    }
    if (rc.command == "norm-map") {
        auto run = run_norm_map(rc);
        write_norm_map_files(run, dir);
        return run.summary;
    }
    if (rc.command == "bifurcation") {
        auto run = run_bifurcation(rc);
        write_bifurcation_files(run, dir);
        return run.summary;
    }
    if (rc.command == "langevin") {
        auto run = run_langevin(rc);
        write_langevin_files(run, dir);
        return run.summary;
    }
    if (rc.command == "oracle-check") {
        auto run = run_oracle_check(rc);
        write_oracle_check_files(run, dir);
        return run.summary;
    }
    throw std::invalid_argument("unknown command '" + rc.command + "'");
}

}  // namespace fwescape
