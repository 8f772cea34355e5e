#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "fwescape/config.hpp"
#include "fwescape/landscape.hpp"
#include "fwescape/langevin.hpp"
#include "fwescape/trajectory.hpp"

namespace fwescape {

/// Shortest round-trip decimal form, locale-independent ('.' always).
inline std::string csv_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc())
        throw std::runtime_error("csv_number: conversion failed");
    return std::string(buf, res.ptr);
}

inline void csv_format_line(std::ostream& os) {
    os << "# format=" << kFormatVersion << "\n";
}

/// Validate the tag line of an emitted file; rejects other majors.
inline void csv_check_format_line(const std::string& line) {
    const std::string prefix = "# format=";
    if (line.compare(0, prefix.size(), prefix) != 0)
        throw std::invalid_argument("csv: missing format line");
    check_format_version(line.substr(prefix.size()));
}

namespace detail {

inline void csv_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
        os << (i ? "," : "") << cells[i];
    os << "\n";
}

}  // namespace detail

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    csv_format_line(os);
    bool sphere = false;
    for (const auto& q : traj.points) sphere |= q.has_m;
    os << "t,s,S,x,y,px,py,h_resid,psi,gamma";
    if (sphere) os << ",mx,my,mz,pmx,pmy,pmz";
    os << "\n";
    for (const auto& q : traj.points) {
        std::vector<std::string> row{
            csv_number(q.t),  csv_number(q.s),   csv_number(q.S),
            csv_number(q.x.x), csv_number(q.x.y), csv_number(q.p.x),
            csv_number(q.p.y), csv_number(q.h_resid), csv_number(q.psi),
            csv_number(q.gamma)};
        if (sphere) {
            row.push_back(csv_number(q.m.x));
            row.push_back(csv_number(q.m.y));
            row.push_back(csv_number(q.m.z));
            row.push_back(csv_number(q.pm.x));
            row.push_back(csv_number(q.pm.y));
            row.push_back(csv_number(q.pm.z));
        }
        detail::csv_row(os, row);
    }
}

inline void write_grid_csv(std::ostream& os, const NormLandscape& L) {
    csv_format_line(os);
    const bool split = !L.precessional.empty();
    os << "x,y,value" << (split ? ",precessional,nongradient" : "") << "\n";
    for (int j = 0; j < L.grid.ny; ++j) {
        for (int i = 0; i < L.grid.nx; ++i) {
            const Vec2 x = L.grid.node(i, j);
            const std::size_t k =
                static_cast<std::size_t>(i) +
                static_cast<std::size_t>(L.grid.nx) * j;
            std::vector<std::string> row{csv_number(x.x), csv_number(x.y),
                                         csv_number(L.values[k])};
            if (split) {
                row.push_back(csv_number(L.precessional[k]));
                row.push_back(csv_number(L.nongradient[k]));
            }
            detail::csv_row(os, row);
        }
    }
}

inline void write_extrema_csv(std::ostream& os,
                              const std::vector<Extremum>& extrema) {
    csv_format_line(os);
    os << "x,y,value,type,lambda1,lambda2,refined,degenerate\n";
    for (const Extremum& e : extrema)
        detail::csv_row(os, {csv_number(e.x.x), csv_number(e.x.y),
                             csv_number(e.value), to_string(e.type),
                             csv_number(e.lambda[0]), csv_number(e.lambda[1]),
                             e.refined ? "1" : "0", e.degenerate ? "1" : "0"});
}

inline void write_events_csv(std::ostream& os, const EscapeSummary& s) {
    csv_format_line(os);
    os << "realization,stream_seed,exit_time,exit_x,exit_y,section_y\n";
    for (const EscapeEvent& e : s.events)
        detail::csv_row(os,
                        {std::to_string(e.realization),
                         std::to_string(e.stream_seed),
                         csv_number(e.exit_time), csv_number(e.exit.x),
                         csv_number(e.exit.y),
                         e.section_y ? csv_number(*e.section_y) : ""});
}

inline void write_bifurcation_csv(std::ostream& os,
                                  const BifurcationResult& r) {
    csv_format_line(os);
    os << "param,tracked,x,y,value,type,lambda1,lambda2\n";
    for (const BifurcationStep& st : r.steps) {
        const Extremum& e = st.extremum;
        detail::csv_row(os, {csv_number(st.param), st.tracked ? "1" : "0",
                             csv_number(e.x.x), csv_number(e.x.y),
                             csv_number(e.value), to_string(e.type),
                             csv_number(e.lambda[0]),
                             csv_number(e.lambda[1])});
    }
}

}  // namespace fwescape
