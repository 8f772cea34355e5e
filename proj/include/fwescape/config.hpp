#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fwescape/langevin.hpp"
#include "fwescape/models/macrospin.hpp"
#include "fwescape/shoot.hpp"
#include "fwescape/vec.hpp"

namespace fwescape {

using json = nlohmann::json;

/// Tag carried by every emitted file; readers reject a different major.
inline constexpr const char* kFormatVersion = "fwescape/1";

inline void check_format_version(const std::string& tag) {
    const std::string want(kFormatVersion);
    const auto cut = want.rfind('/');
    if (tag.compare(0, cut + 1, want, 0, cut + 1) != 0)
        throw std::invalid_argument("config: unrecognized format tag '" + tag +
                                    "'");
    const auto dot = tag.find('.');
    const std::string major = tag.substr(cut + 1, dot - cut - 1);
    if (major != want.substr(cut + 1))
        throw std::invalid_argument("config: format major version '" + tag +
                                    "' not supported by " + want);
}

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::string& where,
                                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok)
            throw std::invalid_argument("config: unknown key '" +
                                        (where.empty() ? key : where + "." + key) +
                                        "'");
    }
}

template <typename T>
T take(const json& obj, const std::string& where, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config: bad value for '" + where + "." +
                                    key + "'");
    }
}

inline Vec2 take_vec2(const json& obj, const std::string& where,
                      const char* key, Vec2 fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number())
        throw std::invalid_argument("config: '" + where + "." + key +
                                    "' must be [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace detail

/// Model selection plus the caption-style dimensionless drive parameters.
/// For the macrospin the physical current and tilt are resolved from the
/// ratios: omega = omega_ratio * critical_angle(D) and
/// |I| = current_ratio * critical_current(D, omega), destabilizing drive
/// being negative in this parametrization.
struct ModelConfig {
    std::string name = "maier_stein";
    double alpha = 1.0;
    double D = 0.0;
    double current_ratio = 0.0;
    double omega_ratio = 0.0;

    double omega = 0.0;  // resolved tilt angle
    double I = 0.0;      // resolved signed current

    void resolve() {
        if (name == "macrospin") {
            omega = omega_ratio * models::critical_angle(D);
            I = -current_ratio * models::critical_current(D, omega);
        } else {
            omega = 0.0;
            I = 0.0;
        }
    }
};

struct SolverConfig {
    int fan = 16;
    double seed_radius = 1e-3;
    double gamma_skip_band = 0.05;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_time = 2e3;
    double max_arc_length = 50.0;
    double h_resid_guard = 1e-8;
    double record_action_rtol = 1e-6;
    std::uint64_t max_steps = 2'000'000;
    /// stop margin below the zero-energy separatrix for spherical models
    double sep_margin = 1e-6;
    /// crossing detection: configuration-space match tolerance and the
    /// momentum-distinctness tolerance as a fraction of the escape scale
    double match_tol = 1e-3;
    double momentum_tol_factor = 1e-2;

    ShootingConfig shooting() const {
        ShootingConfig cfg;
        cfg.rel_tol = rel_tol;
        cfg.abs_tol = abs_tol;
        cfg.max_time = max_time;
        cfg.max_arc_length = max_arc_length;
        cfg.h_resid_guard = h_resid_guard;
        cfg.record_action_rtol = record_action_rtol;
        cfg.max_steps = max_steps;
        return cfg;
    }
};

struct GridConfig {
    Vec2 lo{-1.5, -1.0};
    Vec2 hi{1.5, 1.0};
    int nx = 256;
    int ny = 256;
};

struct LangevinConfig {
    double eps_noise = 0.05;
    double dt = 1e-2;
    double max_time = 1e4;
    int realizations = 1;
    Vec2 x0{1.0, 0.0};
    std::optional<double> section_x;
    std::optional<double> stop_x_below;
    // stationary-law check (spherical models): sample count and spacing
    int samples = 1200;
    double burn_in = 100.0;
    double stride = 25.0;

    SimConfig sim(std::uint64_t seed) const {
        SimConfig cfg;
        cfg.eps_noise = eps_noise;
        cfg.dt = dt;
        cfg.max_time = max_time;
        cfg.realizations = realizations;
        cfg.x0 = x0;
        cfg.seed = seed;
        cfg.section_x = section_x;
        if (stop_x_below)
            cfg.stop = [c = *stop_x_below](Vec2 x) { return x.x <= c; };
        return cfg;
    }
};

struct BifurcationConfig {
    double param_lo = 3.0;
    double param_hi = 5.0;
    int steps = 41;
    double param_tol = 1e-3;
};

struct RunConfig {
    std::string format_version = kFormatVersion;
    std::string command;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int threads = 1;
    ModelConfig model;
    SolverConfig solver;
    GridConfig grid;
    LangevinConfig langevin;
    BifurcationConfig bifurcation;
};

inline ModelConfig parse_model_config(const json& obj) {
    detail::reject_unknown_keys(obj, "model",
                                {"name", "alpha", "D", "current_ratio",
                                 "omega_ratio", "omega", "I"});
    ModelConfig m;
    m.name = detail::take<std::string>(obj, "model", "name", m.name);
    if (m.name != "maier_stein" && m.name != "macrospin" &&
        m.name != "double_well")
        throw std::invalid_argument("config: unknown model '" + m.name + "'");
    m.alpha = detail::take(obj, "model", "alpha", m.alpha);
    for (const char* key : {"D", "current_ratio", "omega_ratio"})
        if (obj.contains(key) && m.name != "macrospin")
            throw std::invalid_argument("config: 'model." + std::string(key) +
                                        "' only applies to the macrospin");
    if (obj.contains("alpha") && m.name == "double_well")
        throw std::invalid_argument(
            "config: 'model.alpha' does not apply to the double well");
    m.D = detail::take(obj, "model", "D", m.D);
    m.current_ratio = detail::take(obj, "model", "current_ratio", m.current_ratio);
    m.omega_ratio = detail::take(obj, "model", "omega_ratio", m.omega_ratio);
    if (m.name == "macrospin" &&
        (!(m.D >= 0.0) || !(m.current_ratio >= 0.0) || !(m.omega_ratio >= 0.0)))
        throw std::invalid_argument(
            "config: macrospin ratios and D must be nonnegative");
    m.resolve();
    // resolved echoes are accepted back on round-trip but must agree
    if (obj.contains("omega") &&
        std::abs(obj.at("omega").get<double>() - m.omega) > 1e-12)
        throw std::invalid_argument(
            "config: 'model.omega' disagrees with omega_ratio");
    if (obj.contains("I") && std::abs(obj.at("I").get<double>() - m.I) > 1e-12)
        throw std::invalid_argument(
            "config: 'model.I' disagrees with current_ratio");
    return m;
}

inline SolverConfig parse_solver_config(const json& obj) {
    detail::reject_unknown_keys(
        obj, "solver",
        {"fan", "seed_radius", "gamma_skip_band", "rel_tol", "abs_tol",
         "max_time", "max_arc_length", "h_resid_guard", "record_action_rtol",
         "max_steps", "sep_margin", "match_tol", "momentum_tol_factor"});
    SolverConfig s;
    s.fan = detail::take(obj, "solver", "fan", s.fan);
    s.seed_radius = detail::take(obj, "solver", "seed_radius", s.seed_radius);
    s.gamma_skip_band =
        detail::take(obj, "solver", "gamma_skip_band", s.gamma_skip_band);
    s.rel_tol = detail::take(obj, "solver", "rel_tol", s.rel_tol);
    s.abs_tol = detail::take(obj, "solver", "abs_tol", s.abs_tol);
    s.max_time = detail::take(obj, "solver", "max_time", s.max_time);
    s.max_arc_length =
        detail::take(obj, "solver", "max_arc_length", s.max_arc_length);
    s.h_resid_guard =
        detail::take(obj, "solver", "h_resid_guard", s.h_resid_guard);
    s.record_action_rtol =
        detail::take(obj, "solver", "record_action_rtol", s.record_action_rtol);
    s.max_steps = detail::take(obj, "solver", "max_steps", s.max_steps);
    s.sep_margin = detail::take(obj, "solver", "sep_margin", s.sep_margin);
    s.match_tol = detail::take(obj, "solver", "match_tol", s.match_tol);
    s.momentum_tol_factor = detail::take(obj, "solver", "momentum_tol_factor",
                                         s.momentum_tol_factor);
    if (s.fan < 1 || !(s.seed_radius > 0.0))
        throw std::invalid_argument("config: solver fan/seed_radius invalid");
    return s;
}

inline GridConfig parse_grid_config(const json& obj) {
    detail::reject_unknown_keys(obj, "grid", {"lo", "hi", "nx", "ny"});
    GridConfig g;
    g.lo = detail::take_vec2(obj, "grid", "lo", g.lo);
    g.hi = detail::take_vec2(obj, "grid", "hi", g.hi);
    g.nx = detail::take(obj, "grid", "nx", g.nx);
    g.ny = detail::take(obj, "grid", "ny", g.ny);
    if (g.nx < 2 || g.ny < 2 || !(g.hi.x > g.lo.x) || !(g.hi.y > g.lo.y))
        throw std::invalid_argument("config: degenerate grid block");
    return g;
}

inline LangevinConfig parse_langevin_config(const json& obj) {
    detail::reject_unknown_keys(
        obj, "langevin",
        {"eps_noise", "dt", "max_time", "realizations", "x0", "section_x",
         "stop_x_below", "samples", "burn_in", "stride"});
    LangevinConfig l;
    l.eps_noise = detail::take(obj, "langevin", "eps_noise", l.eps_noise);
    l.dt = detail::take(obj, "langevin", "dt", l.dt);
    l.max_time = detail::take(obj, "langevin", "max_time", l.max_time);
    l.realizations =
        detail::take(obj, "langevin", "realizations", l.realizations);
    l.x0 = detail::take_vec2(obj, "langevin", "x0", l.x0);
    if (obj.contains("section_x"))
        l.section_x = detail::take(obj, "langevin", "section_x", 0.0);
    if (obj.contains("stop_x_below"))
        l.stop_x_below = detail::take(obj, "langevin", "stop_x_below", 0.0);
    l.samples = detail::take(obj, "langevin", "samples", l.samples);
    l.burn_in = detail::take(obj, "langevin", "burn_in", l.burn_in);
    l.stride = detail::take(obj, "langevin", "stride", l.stride);
    if (!(l.dt > 0.0) || !(l.eps_noise > 0.0) || l.realizations < 1 ||
        l.samples < 1 || !(l.stride > 0.0))
        throw std::invalid_argument("config: langevin block invalid");
    return l;
}

inline BifurcationConfig parse_bifurcation_config(const json& obj) {
    detail::reject_unknown_keys(obj, "bifurcation",
                                {"param_lo", "param_hi", "steps", "param_tol"});
    BifurcationConfig b;
    b.param_lo = detail::take(obj, "bifurcation", "param_lo", b.param_lo);
    b.param_hi = detail::take(obj, "bifurcation", "param_hi", b.param_hi);
    b.steps = detail::take(obj, "bifurcation", "steps", b.steps);
    b.param_tol = detail::take(obj, "bifurcation", "param_tol", b.param_tol);
    if (b.steps < 2 || !(b.param_hi > b.param_lo) || !(b.param_tol > 0.0))
        throw std::invalid_argument("config: bifurcation block invalid");
    return b;
}

/// Parse and validate a run configuration.  Every key is checked against
/// the schema and unknown keys are fatal; a config embedded in an emitted
/// summary parses back to the identical RunConfig.
inline RunConfig parse_run_config(const json& obj,
                                  const std::string& command = "") {
    if (!obj.is_object())
        throw std::invalid_argument("config: top level must be an object");
    detail::reject_unknown_keys(obj, "",
                                {"format_version", "command", "out_dir",
                                 "seed", "threads", "model", "solver", "grid",
                                 "langevin", "bifurcation"});
    RunConfig rc;
    rc.format_version = detail::take<std::string>(obj, "", "format_version",
                                                  rc.format_version);
    check_format_version(rc.format_version);
    rc.command = detail::take<std::string>(obj, "", "command", command);
    if (!command.empty() && !rc.command.empty() && rc.command != command)
        throw std::invalid_argument("config: embedded command '" + rc.command +
                                    "' does not match invoked '" + command +
                                    "'");
    rc.out_dir = detail::take<std::string>(obj, "", "out_dir", rc.out_dir);
    rc.seed = detail::take(obj, "", "seed", rc.seed);
    rc.threads = detail::take(obj, "", "threads", rc.threads);
    if (rc.threads < 1)
        throw std::invalid_argument("config: threads must be >= 1");
    if (obj.contains("model")) rc.model = parse_model_config(obj.at("model"));
    if (obj.contains("solver"))
        rc.solver = parse_solver_config(obj.at("solver"));
    if (obj.contains("grid")) rc.grid = parse_grid_config(obj.at("grid"));
    if (obj.contains("langevin"))
        rc.langevin = parse_langevin_config(obj.at("langevin"));
    if (obj.contains("bifurcation"))
        rc.bifurcation = parse_bifurcation_config(obj.at("bifurcation"));
    return rc;
}

/// The fully resolved configuration a summary embeds: defaults filled in,
/// ratios resolved to physical values, ready to be fed back unchanged.
inline json resolved_config(const RunConfig& rc) {
    json model{{"name", rc.model.name}};
    if (rc.model.name != "double_well") model["alpha"] = rc.model.alpha;
    if (rc.model.name == "macrospin") {
        model["D"] = rc.model.D;
        model["current_ratio"] = rc.model.current_ratio;
        model["omega_ratio"] = rc.model.omega_ratio;
        model["omega"] = rc.model.omega;
        model["I"] = rc.model.I;
    }
    json out{{"format_version", rc.format_version},
             {"command", rc.command},
             {"out_dir", rc.out_dir},
             {"seed", rc.seed},
             {"threads", rc.threads},
             {"model", model}};
    const SolverConfig& s = rc.solver;
    out["solver"] = {{"fan", s.fan},
                     {"seed_radius", s.seed_radius},
                     {"gamma_skip_band", s.gamma_skip_band},
                     {"rel_tol", s.rel_tol},
                     {"abs_tol", s.abs_tol},
                     {"max_time", s.max_time},
                     {"max_arc_length", s.max_arc_length},
                     {"h_resid_guard", s.h_resid_guard},
                     {"record_action_rtol", s.record_action_rtol},
                     {"max_steps", s.max_steps},
                     {"sep_margin", s.sep_margin},
                     {"match_tol", s.match_tol},
                     {"momentum_tol_factor", s.momentum_tol_factor}};
    out["grid"] = {{"lo", {rc.grid.lo.x, rc.grid.lo.y}},
                   {"hi", {rc.grid.hi.x, rc.grid.hi.y}},
                   {"nx", rc.grid.nx},
                   {"ny", rc.grid.ny}};
    json lang{{"eps_noise", rc.langevin.eps_noise},
              {"dt", rc.langevin.dt},
              {"max_time", rc.langevin.max_time},
              {"realizations", rc.langevin.realizations},
              {"x0", {rc.langevin.x0.x, rc.langevin.x0.y}},
              {"samples", rc.langevin.samples},
              {"burn_in", rc.langevin.burn_in},
              {"stride", rc.langevin.stride}};
    if (rc.langevin.section_x) lang["section_x"] = *rc.langevin.section_x;
    if (rc.langevin.stop_x_below)
        lang["stop_x_below"] = *rc.langevin.stop_x_below;
    out["langevin"] = lang;
    out["bifurcation"] = {{"param_lo", rc.bifurcation.param_lo},
                          {"param_hi", rc.bifurcation.param_hi},
                          {"steps", rc.bifurcation.steps},
                          {"param_tol", rc.bifurcation.param_tol}};
    return out;
}

}  // namespace fwescape
