#pragma once

// JSON and CSV emission for reports and trajectories. Needs nlohmann/json.

#include <cstdio>
#include <ostream>
#include <string>

#include "json.hpp"

#include "sl2c/coalgebra.hpp"
#include "sl2c/dynamics.hpp"
#include "sl2c/geometry.hpp"

namespace sl2c {

using Json = nlohmann::ordered_json;

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline Json to_json(const PhaseState& s) { return Json{{"q", s.q()}, {"p", s.p()}}; }

inline Json to_json(const VerificationReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back({{"relation", c.relation}, {"max_residual", c.max_residual}});
  Json j{{"relation", r.relation},  {"samples", r.samples}, {"seed", r.seed},
         {"tol", r.tol},            {"max_residual", r.max_residual}, {"worst_relation", r.worst_relation},
         {"worst_state", r.worst_state.dim() ? to_json(r.worst_state) : Json(nullptr)},
         {"pass", r.pass},          {"checks", checks}};
  return j;
}

inline Json to_json(const CurvatureReport& r) {
  Json pts = Json::array();
  for (const auto& p : r.points)
    pts.push_back({{"q1", p.q1},
                   {"q2", p.q2},
                   {"K_closed", p.k_closed ? Json(*p.k_closed) : Json(nullptr)},
                   {"K_brioschi", p.k_brioschi}});
  return Json{{"system", r.system},
              {"formula", r.formula.empty() ? Json(nullptr) : Json(r.formula)},
              {"max_discrepancy", r.max_discrepancy},
              {"max_relative_discrepancy", r.max_relative_discrepancy},
              {"points", pts}};
}

inline Json to_json(const DriftReport& r) {
  Json mons = Json::object();
  for (const auto& m : r.monitors)
    mons[m.name] = {{"initial", m.initial}, {"max_abs_drift", m.max_abs_drift}, {"rel_drift", m.rel_drift},
                    {"slope", m.slope}};
  Json j{{"integrator", to_string(r.integrator)},
         {"dt", r.dt},
         {"steps", r.steps},
         {"completed_steps", r.completed_steps},
         {"max_fp_iterations", r.max_fp_iterations},
         {"total_fp_iterations", r.total_fp_iterations},
         {"aborted", r.aborted},
         {"monitors", mons}};
  if (r.aborted) j["error"] = r.error;
  return j;
}

inline Json to_json(const ScanVerdict& v) {
  return Json{{"constant", v.constant}, {"k_mean", v.k_mean}, {"k_min", v.k_min},
              {"k_max", v.k_max},       {"x", v.x},           {"K", v.k}};
}

/// Header t,q1..qN,p1..pN,H,<monitor names>, then one row per time step.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  if (tr.states.empty()) return;
  const std::size_t n = tr.states.front().dim();
  os << "t";
  for (std::size_t i = 1; i <= n; ++i) os << ",q" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",p" << i;
  for (const auto& m : tr.monitor_names) os << ',' << m;
  os << '\n';
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << format_double(tr.time(k));
    for (double x : tr.states[k].q()) os << ',' << format_double(x);
    for (double x : tr.states[k].p()) os << ',' << format_double(x);
    for (double x : tr.values[k]) os << ',' << format_double(x);
    os << '\n';
  }
}

/// Columns q1,q2,K_closed,K_brioschi; K_closed is empty when no closed form is known.
inline void write_curvature_csv(std::ostream& os, const CurvatureReport& r) {
  os << "q1,q2,K_closed,K_brioschi\n";
  for (const auto& p : r.points)
    os << format_double(p.q1) << ',' << format_double(p.q2) << ','
       << (p.k_closed ? format_double(*p.k_closed) : std::string()) << ',' << format_double(p.k_brioschi) << '\n';
}

}  // namespace sl2c
