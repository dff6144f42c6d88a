#pragma once

// Command-line front end: configuration loading, flag overrides and the
// subcommand drivers. `run` never throws; it returns the exit code.

#include <array>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sl2c/io.hpp"
#include "sl2c/sl2c.hpp"

namespace sl2c::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failed = 1;
inline constexpr int exit_usage = 2;

/// Invalid configuration or command line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SystemConfig {
  std::string name;        // catalog name; empty when `expression` is used
  std::string expression;  // free-form Hamiltonian over Jm, Jp, J3, q_i, p_i
  std::map<std::string, double> params;
  std::map<std::string, std::string> exprs;
};

struct RealizationConfig {
  std::optional<std::string> kind;
  std::optional<std::size_t> n;
  std::optional<double> z;
  std::optional<std::vector<double>> b;
};

struct VerifyConfig {
  std::size_t samples = 100;
  double tol = 1e-9;
  std::uint64_t seed = 42;
  std::string right_order = "ascending";
};

struct GridConfig {
  double lo = 0.2, hi = 1.0;
  std::size_t n = 5;
};

struct CurvatureConfig {
  std::vector<std::array<double, 2>> points;
  std::optional<GridConfig> grid;
  double tol = 1e-7;
  std::optional<std::string> csv;
};

struct SimulateConfig {
  std::vector<double> q0, p0;
  double dt = 1e-3;
  std::size_t steps = 10000;
  std::string integrator = "midpoint";
  std::optional<std::vector<std::string>> monitors;  // unset: defaults
  std::optional<std::string> trajectory_csv;
  std::optional<std::string> drift_json;
};

struct ScanConfig {
  std::string f;
  double x_min = -1.0, x_max = 1.0;
  std::size_t count = 101;
  double z = 1.0;
  double tol = 1e-9;
  std::map<std::string, double> params;
};

struct TransformConfig {
  std::optional<std::vector<double>> q;
  std::optional<std::vector<double>> polar;
  double z = 0.0;
  double lambda2sq = 1.0;
};

struct RunConfig {
  int schema = 1;
  std::optional<SystemConfig> system;
  RealizationConfig realization;
  VerifyConfig verify;
  CurvatureConfig curvature;
  SimulateConfig simulate;
  ScanConfig scan;
  TransformConfig transform;
  std::optional<std::string> report_json;
};

namespace detail {

using nlohmann::json;

inline void allow_keys(const json& j, const std::string& where, const std::set<std::string>& keys) {
  if (!j.is_object()) throw ConfigError("config field '" + where + "' must be an object");
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw ConfigError("unknown config key '" + (where.empty() ? k : where + "." + k) + "'");
}

inline double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError("config field '" + field + "' must be a number");
  return j.get<double>();
}

inline std::size_t get_count(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw ConfigError("config field '" + field + "' must be a non-negative integer");
  return j.get<std::size_t>();
}

inline std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError("config field '" + field + "' must be a string");
  return j.get<std::string>();
}

inline std::vector<double> get_vector(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError("config field '" + field + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(get_number(x, field));
  return out;
}

inline std::map<std::string, double> get_params(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError("config field '" + field + "' must be an object");
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) out[k] = get_number(v, field + "." + k);
  return out;
}

inline std::map<std::string, std::string> get_strings(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError("config field '" + field + "' must be an object");
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) out[k] = get_string(v, field + "." + k);
  return out;
}

inline std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = s.find(',', start);
    const std::string tok = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    double v = 0.0;
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    while (b < e && *b == ' ') ++b;
    if (b < e && *b == '+') ++b;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || b == e) throw ConfigError("invalid number '" + tok + "' in " + what);
    out.push_back(v);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

inline std::pair<std::string, std::string> split_assignment(const std::string& s, const std::string& flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(flag + " expects name=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

}  // namespace detail

/// Validates a parsed JSON document and fills defaults.
inline RunConfig parse_config(const nlohmann::json& j) {
  using namespace detail;
  allow_keys(j, "", {"schema", "system", "realization", "verify", "curvature", "simulate", "scan", "transform",
                     "report_json"});
  RunConfig c;
  if (j.contains("schema")) {
    if (!j["schema"].is_number_integer() || j["schema"].get<int>() != 1)
      throw ConfigError("config field 'schema' must be 1");
  }
  if (j.contains("system")) {
    const auto& s = j["system"];
    SystemConfig sc;
    if (s.is_string()) {
      sc.name = s.get<std::string>();
    } else {
      allow_keys(s, "system", {"name", "expression", "params", "exprs"});
      if (s.contains("name")) sc.name = get_string(s["name"], "system.name");
      if (s.contains("expression")) sc.expression = get_string(s["expression"], "system.expression");
      if (s.contains("params")) sc.params = get_params(s["params"], "system.params");
      if (s.contains("exprs")) sc.exprs = get_strings(s["exprs"], "system.exprs");
    }
    if (sc.name.empty() == sc.expression.empty())
      throw ConfigError("config field 'system' needs exactly one of 'name' and 'expression'");
    if (!sc.name.empty()) {
      try {
        catalog_entry(sc.name);
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config field 'system.name': ") + e.what());
      }
    }
    c.system = sc;
  }
  if (j.contains("realization")) {
    const auto& r = j["realization"];
    allow_keys(r, "realization", {"kind", "N", "z", "b"});
    if (r.contains("kind")) {
      const auto k = get_string(r["kind"], "realization.kind");
      if (k != "classical" && k != "deformed")
        throw ConfigError("config field 'realization.kind' must be 'classical' or 'deformed'");
      c.realization.kind = k;
    }
    if (r.contains("N")) {
      const auto n = get_count(r["N"], "realization.N");
      if (n < 1) throw ConfigError("config field 'realization.N' must be >= 1");
      c.realization.n = n;
    }
    if (r.contains("z")) c.realization.z = get_number(r["z"], "realization.z");
    if (r.contains("b")) c.realization.b = get_vector(r["b"], "realization.b");
    if (c.realization.n && c.realization.b && c.realization.b->size() != *c.realization.n)
      throw ConfigError("config field 'b' has " + std::to_string(c.realization.b->size()) +
                        " entries but realization.N is " + std::to_string(*c.realization.n));
    if (c.realization.kind == std::string("classical") && c.realization.z && *c.realization.z != 0.0)
      throw ConfigError("config field 'realization.z' is not allowed for a classical realization");
  }
  if (j.contains("verify")) {
    const auto& v = j["verify"];
    allow_keys(v, "verify", {"samples", "tol", "seed", "right_order"});
    if (v.contains("samples")) c.verify.samples = get_count(v["samples"], "verify.samples");
    if (v.contains("tol")) c.verify.tol = get_number(v["tol"], "verify.tol");
    if (v.contains("seed")) c.verify.seed = get_count(v["seed"], "verify.seed");
    if (v.contains("right_order")) c.verify.right_order = get_string(v["right_order"], "verify.right_order");
  }
  if (j.contains("curvature")) {
    const auto& v = j["curvature"];
    allow_keys(v, "curvature", {"points", "grid", "tol", "csv"});
    if (v.contains("points")) {
      if (!v["points"].is_array()) throw ConfigError("config field 'curvature.points' must be an array");
      for (const auto& p : v["points"]) {
        const auto xy = get_vector(p, "curvature.points");
        if (xy.size() != 2) throw ConfigError("config field 'curvature.points' entries must be [q1, q2]");
        c.curvature.points.push_back({xy[0], xy[1]});
      }
    }
    if (v.contains("grid")) {
      const auto& g = v["grid"];
      allow_keys(g, "curvature.grid", {"lo", "hi", "n"});
      GridConfig gc;
      if (g.contains("lo")) gc.lo = get_number(g["lo"], "curvature.grid.lo");
      if (g.contains("hi")) gc.hi = get_number(g["hi"], "curvature.grid.hi");
      if (g.contains("n")) gc.n = get_count(g["n"], "curvature.grid.n");
      c.curvature.grid = gc;
    }
    if (v.contains("tol")) c.curvature.tol = get_number(v["tol"], "curvature.tol");
    if (v.contains("csv")) c.curvature.csv = get_string(v["csv"], "curvature.csv");
  }
  if (j.contains("simulate")) {
    const auto& v = j["simulate"];
    allow_keys(v, "simulate",
               {"q0", "p0", "dt", "steps", "integrator", "monitors", "trajectory_csv", "drift_json"});
    if (v.contains("q0")) c.simulate.q0 = get_vector(v["q0"], "simulate.q0");
    if (v.contains("p0")) c.simulate.p0 = get_vector(v["p0"], "simulate.p0");
    if (v.contains("dt")) c.simulate.dt = get_number(v["dt"], "simulate.dt");
    if (v.contains("steps")) c.simulate.steps = get_count(v["steps"], "simulate.steps");
    if (v.contains("integrator")) c.simulate.integrator = get_string(v["integrator"], "simulate.integrator");
    if (v.contains("monitors")) {
      if (!v["monitors"].is_array()) throw ConfigError("config field 'simulate.monitors' must be an array of names");
      std::vector<std::string> names;
      for (const auto& m : v["monitors"]) names.push_back(get_string(m, "simulate.monitors"));
      c.simulate.monitors = names;
    }
    if (v.contains("trajectory_csv")) c.simulate.trajectory_csv = get_string(v["trajectory_csv"], "simulate.trajectory_csv");
    if (v.contains("drift_json")) c.simulate.drift_json = get_string(v["drift_json"], "simulate.drift_json");
  }
  if (j.contains("scan")) {
    const auto& v = j["scan"];
    allow_keys(v, "scan", {"f", "x_min", "x_max", "count", "z", "tol", "params"});
    if (v.contains("f")) c.scan.f = get_string(v["f"], "scan.f");
    if (v.contains("x_min")) c.scan.x_min = get_number(v["x_min"], "scan.x_min");
    if (v.contains("x_max")) c.scan.x_max = get_number(v["x_max"], "scan.x_max");
    if (v.contains("count")) c.scan.count = get_count(v["count"], "scan.count");
    if (v.contains("z")) c.scan.z = get_number(v["z"], "scan.z");
    if (v.contains("tol")) c.scan.tol = get_number(v["tol"], "scan.tol");
    if (v.contains("params")) c.scan.params = get_params(v["params"], "scan.params");
  }
  if (j.contains("transform")) {
    const auto& v = j["transform"];
    allow_keys(v, "transform", {"q", "polar", "z", "lambda2sq"});
    if (v.contains("q")) c.transform.q = get_vector(v["q"], "transform.q");
    if (v.contains("polar")) c.transform.polar = get_vector(v["polar"], "transform.polar");
    if (v.contains("z")) c.transform.z = get_number(v["z"], "transform.z");
    if (v.contains("lambda2sq")) c.transform.lambda2sq = get_number(v["lambda2sq"], "transform.lambda2sq");
  }
  if (j.contains("report_json")) c.report_json = get_string(j["report_json"], "report_json");
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config is not valid JSON (byte " + std::to_string(e.byte) + "): " + e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Realization from the config, falling back to the system's kind, N = 2, z = 0
/// and b = 0.
inline Realization resolve_realization(const RunConfig& c, std::optional<RealizationKind> fallback = std::nullopt) {
  RealizationKind kind = fallback.value_or(RealizationKind::classical);
  if (c.realization.kind) kind = *c.realization.kind == "deformed" ? RealizationKind::deformed : RealizationKind::classical;
  const std::size_t n = c.realization.n.value_or(c.realization.b ? c.realization.b->size() : 2);
  std::vector<double> b = c.realization.b.value_or(std::vector<double>(n, 0.0));
  if (b.size() != n)
    throw ConfigError("config field 'b' has " + std::to_string(b.size()) + " entries but N is " + std::to_string(n));
  const double z = c.realization.z.value_or(0.0);
  if (kind == RealizationKind::classical) {
    if (z != 0.0) throw ConfigError("config field 'z' is not allowed for a classical realization");
    return Realization::classical(n, b);
  }
  return Realization::deformed(n, z, b);
}

inline SystemSpec resolve_system(const RunConfig& c) {
  if (!c.system) throw ConfigError("no system given (use --system or the config field 'system')");
  const auto& s = *c.system;
  if (!s.name.empty()) {
    const auto& entry = catalog_entry(s.name);
    return build(s.name, s.params, resolve_realization(c, entry.kind), s.exprs);
  }
  const Realization r = resolve_realization(c);
  SystemSpec spec;
  spec.name = "expression";
  spec.realization = r;
  spec.params = s.params;
  spec.hamiltonian_ast = expr::parse(s.expression);
  spec.hamiltonian = compile(spec.hamiltonian_ast, r, s.params, "H");
  return spec;
}

namespace detail {

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

/// Shortest representation that round-trips.
inline std::string fmt(double x) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline void print_report(std::ostream& out, const VerificationReport& r) {
  out << (r.pass ? "PASS " : "FAIL ") << r.relation << ": max residual " << fmt(r.max_residual) << " (tol "
      << fmt(r.tol) << ", " << r.samples << " samples, seed " << r.seed << ")\n";
  for (const auto& ch : r.checks) out << "  " << ch.relation << "  " << fmt(ch.max_residual) << '\n';
  if (!r.pass) out << "  worst: " << r.worst_relation << '\n';
}

}  // namespace detail

struct Flags {
  std::string config;
  std::optional<std::string> system, kind, sign, right_order, f, integrator, json_out, csv_out,
      trajectory, drift, grid, x_range, q, polar, q0, p0, b, expression;
  std::optional<std::size_t> n, samples, steps, count;
  std::optional<double> z, tol, dt, lambda2sq;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> params, exprs, at, monitors;
};

/// Applies command-line flags on top of the configuration.
inline void apply_flags(RunConfig& c, const Flags& fl) {
  using detail::parse_list;
  if (fl.system || fl.expression) {
    if (!c.system) c.system = SystemConfig{};
    if (fl.system) {
      c.system->name = *fl.system;
      c.system->expression.clear();
      catalog_entry(*fl.system);
    }
    if (fl.expression) {
      c.system->expression = *fl.expression;
      c.system->name.clear();
    }
  }
  if (!fl.params.empty() || !fl.exprs.empty() || fl.sign) {
    if (!c.system) throw ConfigError("system parameters given without a system");
    for (const auto& a : fl.params) {
      const auto [k, v] = detail::split_assignment(a, "--param");
      c.system->params[k] = parse_list(v, "--param " + k).at(0);
    }
    for (const auto& a : fl.exprs) {
      const auto [k, v] = detail::split_assignment(a, "--expr");
      c.system->exprs[k] = v;
    }
    if (fl.sign) {
      const std::string& s = *fl.sign;
      if (s == "+" || s == "+1" || s == "1") c.system->params["sign"] = 1.0;
      else if (s == "-" || s == "-1") c.system->params["sign"] = -1.0;
      else throw ConfigError("--sign must be + or -");
    }
  }
  if (fl.kind) {
    if (*fl.kind != "classical" && *fl.kind != "deformed") throw ConfigError("--kind must be classical or deformed");
    c.realization.kind = *fl.kind;
  }
  if (fl.n) {
    if (*fl.n < 1) throw ConfigError("--n must be >= 1");
    c.realization.n = *fl.n;
    if (c.realization.b && c.realization.b->size() != *fl.n && !fl.b) c.realization.b.reset();
  }
  if (fl.z) {
    c.realization.z = *fl.z;
    c.scan.z = *fl.z;
    c.transform.z = *fl.z;
  }
  if (fl.b) c.realization.b = parse_list(*fl.b, "--b");
  if (fl.samples) c.verify.samples = *fl.samples;
  if (fl.tol) {
    c.verify.tol = *fl.tol;
    c.curvature.tol = *fl.tol;
    c.scan.tol = *fl.tol;
  }
  if (fl.seed) c.verify.seed = *fl.seed;
  if (fl.right_order) c.verify.right_order = *fl.right_order;
  if (!fl.at.empty()) {
    c.curvature.points.clear();
    for (const auto& a : fl.at) {
      const auto v = parse_list(a, "--at");
      if (v.size() != 2) throw ConfigError("--at expects q1,q2");
      c.curvature.points.push_back({v[0], v[1]});
    }
  }
  if (fl.grid) {
    const auto v = parse_list(*fl.grid, "--grid");
    if (v.size() != 3 || v[2] < 1 || v[2] != std::floor(v[2])) throw ConfigError("--grid expects lo,hi,n");
    c.curvature.grid = GridConfig{v[0], v[1], static_cast<std::size_t>(v[2])};
  }
  if (fl.csv_out) c.curvature.csv = *fl.csv_out;
  if (fl.q0) c.simulate.q0 = parse_list(*fl.q0, "--q0");
  if (fl.p0) c.simulate.p0 = parse_list(*fl.p0, "--p0");
  if (fl.dt) c.simulate.dt = *fl.dt;
  if (fl.steps) c.simulate.steps = *fl.steps;
  if (fl.integrator) c.simulate.integrator = *fl.integrator;
  if (!fl.monitors.empty()) c.simulate.monitors = fl.monitors;
  if (fl.trajectory) c.simulate.trajectory_csv = *fl.trajectory;
  if (fl.drift) c.simulate.drift_json = *fl.drift;
  if (fl.f) c.scan.f = *fl.f;
  if (fl.x_range) {
    const auto v = parse_list(*fl.x_range, "--x-range");
    if (v.size() != 2) throw ConfigError("--x-range expects x_min,x_max");
    c.scan.x_min = v[0];
    c.scan.x_max = v[1];
  }
  if (fl.count) c.scan.count = *fl.count;
  if (fl.q) c.transform.q = parse_list(*fl.q, "--q");
  if (fl.polar) c.transform.polar = parse_list(*fl.polar, "--polar");
  if (fl.lambda2sq) c.transform.lambda2sq = *fl.lambda2sq;
  if (fl.json_out) c.report_json = *fl.json_out;
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_catalog(const RunConfig& c, std::ostream& out) {
  Json arr = Json::array();
  for (const auto& e : list_catalog()) {
    out << e.name << " [" << to_string(e.kind) << "]";
    if (!e.params.empty()) {
      out << " params:";
      for (const auto& p : e.params) out << ' ' << p;
    }
    if (!e.exprs.empty()) {
      out << " exprs:";
      for (const auto& p : e.exprs) out << ' ' << p;
    }
    out << "\n    " << e.anchor << '\n';
    arr.push_back({{"name", e.name}, {"kind", to_string(e.kind)}, {"params", e.params}, {"exprs", e.exprs},
                   {"description", e.anchor}});
  }
  if (c.report_json) detail::write_json_file(*c.report_json, arr);
  return exit_ok;
}

inline SiteOrder parse_order(const std::string& s) {
  if (s == "ascending") return SiteOrder::ascending;
  if (s == "descending") return SiteOrder::descending;
  throw ConfigError("right_order must be 'ascending' or 'descending'");
}

inline int cmd_verify_algebra(const RunConfig& c, std::ostream& out) {
  const Realization r = resolve_realization(c);
  const auto rep = verify_algebra(r, c.verify.samples, c.verify.tol, c.verify.seed);
  detail::print_report(out, rep);
  if (c.report_json) detail::write_json_file(*c.report_json, to_json(rep));
  return rep.pass ? exit_ok : exit_failed;
}

inline int cmd_verify_integrals(const RunConfig& c, std::ostream& out) {
  const SystemSpec spec = resolve_system(c);
  if (spec.realization.n < 2) throw ConfigError("verify-integrals needs N >= 2");
  const auto fam = integrals_for(spec.realization, parse_order(c.verify.right_order));
  const auto rep = verify_involution(spec.hamiltonian, fam, c.verify.samples, c.verify.tol, c.verify.seed);
  out << spec.name << " on " << to_string(spec.realization.kind) << " N=" << spec.realization.n << '\n';
  detail::print_report(out, rep);
  if (c.report_json) detail::write_json_file(*c.report_json, to_json(rep));
  return rep.pass ? exit_ok : exit_failed;
}

inline int cmd_curvature(const RunConfig& c, std::ostream& out) {
  const SystemSpec spec = resolve_system(c);
  std::vector<std::array<double, 2>> pts = c.curvature.points;
  if (c.curvature.grid) {
    const auto g = grid_points(c.curvature.grid->lo, c.curvature.grid->hi, c.curvature.grid->n);
    pts.insert(pts.end(), g.begin(), g.end());
  }
  if (pts.empty()) pts = grid_points(0.2, 1.0, 5);
  const auto rep = curvature_report(spec, pts);
  for (const auto& p : rep.points) {
    out << "q=(" << detail::fmt(p.q1) << ", " << detail::fmt(p.q2) << ")";
    if (p.k_closed) out << " K_closed=" << detail::fmt(*p.k_closed);
    out << " K_brioschi=" << detail::fmt(p.k_brioschi) << '\n';
  }
  bool pass = true;
  if (!rep.formula.empty()) {
    pass = rep.max_relative_discrepancy <= c.curvature.tol;
    out << (pass ? "PASS" : "FAIL") << " K = " << rep.formula << ": max relative discrepancy "
        << detail::fmt(rep.max_relative_discrepancy) << " (tol " << detail::fmt(c.curvature.tol) << ")\n";
  }
  if (c.curvature.csv) {
    std::ofstream f(*c.curvature.csv);
    if (!f) throw ConfigError("cannot write '" + *c.curvature.csv + "'");
    write_curvature_csv(f, rep);
  }
  if (c.report_json) detail::write_json_file(*c.report_json, to_json(rep));
  return pass ? exit_ok : exit_failed;
}

inline int cmd_transform(const RunConfig& c, std::ostream& out) {
  const auto& t = c.transform;
  if (t.q.has_value() == t.polar.has_value()) throw ConfigError("transform needs exactly one of --q and --polar");
  Json j;
  if (t.q) {
    if (t.q->size() != 2) throw ConfigError("--q expects q1,q2");
    const auto x = to_polar((*t.q)[0], (*t.q)[1], t.z, t.lambda2sq);
    out << "rho=" << detail::fmt(x[0]) << " theta=" << detail::fmt(x[1]) << '\n';
    j = {{"q", *t.q}, {"z", t.z}, {"lambda2sq", t.lambda2sq}, {"rho", x[0]}, {"theta", x[1]}};
  } else {
    if (t.polar->size() != 2) throw ConfigError("--polar expects rho,theta");
    const auto q = from_polar((*t.polar)[0], (*t.polar)[1], t.z, t.lambda2sq);
    out << "q1=" << detail::fmt(q[0]) << " q2=" << detail::fmt(q[1]) << '\n';
    j = {{"polar", *t.polar}, {"z", t.z}, {"lambda2sq", t.lambda2sq}, {"q", {q[0], q[1]}}};
  }
  if (c.report_json) detail::write_json_file(*c.report_json, j);
  return exit_ok;
}

inline int cmd_scan(const RunConfig& c, std::ostream& out) {
  if (c.scan.f.empty()) throw ConfigError("scan-curvature needs an expression f (--f)");
  std::map<std::string, double> params = c.scan.params;
  if (c.system)
    for (const auto& [k, v] : c.system->params) params[k] = v;
  const auto v = constant_curvature_scan(expr::parse(c.scan.f), c.scan.x_min, c.scan.x_max, c.scan.count, c.scan.z,
                                         c.scan.tol, params);
  out << "f(x) = " << c.scan.f << " at z = " << detail::fmt(c.scan.z) << ": "
      << (v.constant ? "constant" : "not constant") << " curvature, K in [" << detail::fmt(v.k_min) << ", "
      << detail::fmt(v.k_max) << "], mean " << detail::fmt(v.k_mean) << '\n';
  if (c.report_json) {
    Json j = to_json(v);
    j["f"] = c.scan.f;
    j["z"] = c.scan.z;
    j["tol"] = c.scan.tol;
    detail::write_json_file(*c.report_json, j);
  }
  return exit_ok;
}

inline int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const SystemSpec spec = resolve_system(c);
  const auto& sc = c.simulate;
  const std::size_t n = spec.realization.n;
  if (sc.q0.size() != n || sc.p0.size() != n)
    throw ConfigError("simulate needs q0 and p0 with N = " + std::to_string(n) + " entries");
  const PhaseState s0(sc.q0, sc.p0);
  std::vector<Observable> mons;
  const auto defaults = default_monitors(spec);
  if (sc.monitors) {
    for (const auto& name : *sc.monitors) {
      const auto it = std::find_if(defaults.begin(), defaults.end(), [&](const Observable& o) { return o.name() == name; });
      if (it == defaults.end()) {
        std::string avail;
        for (const auto& o : defaults) avail += (avail.empty() ? "" : ", ") + o.name();
        throw ConfigError("unknown monitor '" + name + "' (available: " + (avail.empty() ? "none" : avail) + ")");
      }
      mons.push_back(*it);
    }
  } else {
    mons = defaults;
  }
  const auto res = simulate(spec.hamiltonian, s0, sc.dt, sc.steps, mons, parse_integrator(sc.integrator));
  const auto& d = res.drift;
  out << spec.name << ": " << to_string(d.integrator) << ", dt=" << detail::fmt(d.dt) << ", " << d.completed_steps
      << "/" << d.steps << " steps\n";
  for (const auto& m : d.monitors)
    out << "  " << m.name << ": initial " << detail::fmt(m.initial) << ", max |drift| " << detail::fmt(m.max_abs_drift)
        << ", relative " << detail::fmt(m.rel_drift) << '\n';
  if (sc.trajectory_csv) {
    std::ofstream f(*sc.trajectory_csv);
    if (!f) throw ConfigError("cannot write '" + *sc.trajectory_csv + "'");
    write_trajectory_csv(f, res.trajectory);
  }
  if (sc.drift_json) detail::write_json_file(*sc.drift_json, to_json(d));
  if (c.report_json) detail::write_json_file(*c.report_json, to_json(d));
  if (d.aborted) {
    out << "aborted at " << d.error << '\n';
    return exit_failed;
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

}  // namespace detail

/// Parses argv, runs the subcommand and maps outcomes to exit codes:
/// 0 success, 1 verification failure, 2 usage or configuration error.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"sl(2) and sl_z(2) coalgebra superintegrable systems: verification, curvature, dynamics", "sl2c"};
  app.require_subcommand(1);
  Flags fl;

  const auto add_common = [&](CLI::App* s) {
    s->add_option("--config", fl.config, "JSON run configuration (schema 1)");
    s->add_option("--json", fl.json_out, "write the report as JSON");
  };
  const auto add_realization = [&](CLI::App* s) {
    s->add_option("--kind", fl.kind, "classical or deformed");
    s->add_option("--n", fl.n, "number of degrees of freedom N");
    s->add_option("--z", fl.z, "deformation parameter");
    s->add_option("--b", fl.b, "centrifugal coefficients b1,...,bN");
  };
  const auto add_system = [&](CLI::App* s) {
    s->add_option("--system", fl.system, "catalog system name");
    s->add_option("--expression", fl.expression, "free-form Hamiltonian in Jm, Jp, J3, q_i, p_i");
    s->add_option("--param", fl.params, "real parameter name=value (repeatable)");
    s->add_option("--expr", fl.exprs, "expression parameter name=expression (repeatable)");
    s->add_option("--sign", fl.sign, "sign of z_ms: + or -");
  };
  const auto add_verify = [&](CLI::App* s) {
    s->add_option("--samples", fl.samples, "number of random phase-space states");
    s->add_option("--tol", fl.tol, "pass threshold on the scaled residual");
    s->add_option("--seed", fl.seed, "random seed");
  };

  auto* catalog = app.add_subcommand("catalog", "list catalog systems");
  add_common(catalog);

  auto* va = app.add_subcommand("verify-algebra", "check the bracket relations and the Casimir");
  add_common(va);
  add_realization(va);
  add_verify(va);

  auto* vi = app.add_subcommand("verify-integrals", "check involution of a Hamiltonian with the coproduct integrals");
  add_common(vi);
  add_realization(vi);
  add_system(vi);
  add_verify(vi);
  vi->add_option("--right-order", fl.right_order, "site order inside right sub-realizations: ascending or descending");

  auto* cu = app.add_subcommand("curvature", "Gaussian curvature: closed form against Brioschi");
  add_common(cu);
  add_realization(cu);
  add_system(cu);
  cu->add_option("--at", fl.at, "point q1,q2 (repeatable)");
  cu->add_option("--grid", fl.grid, "uniform grid lo,hi,n");
  cu->add_option("--tol", fl.tol, "pass threshold on the relative discrepancy");
  cu->add_option("--csv", fl.csv_out, "write q1,q2,K_closed,K_brioschi");

  auto* tr = app.add_subcommand("transform", "geodesic polar chart of the deformed spaces");
  add_common(tr);
  tr->add_option("--q", fl.q, "Cartesian point q1,q2 to map to (rho, theta)");
  tr->add_option("--polar", fl.polar, "polar point rho,theta to map back");
  tr->add_option("--z", fl.z, "deformation parameter (>= 0)");
  tr->add_option("--lambda2sq", fl.lambda2sq, "lambda2^2");

  auto* sc = app.add_subcommand("scan-curvature", "test whether f(z J-) J+/2 has constant curvature");
  add_common(sc);
  sc->add_option("--f", fl.f, "expression in x with f(0) = 1");
  sc->add_option("--x-range", fl.x_range, "x_min,x_max");
  sc->add_option("--count", fl.count, "number of grid points");
  sc->add_option("--z", fl.z, "deformation parameter");
  sc->add_option("--tol", fl.tol, "constancy threshold");
  sc->add_option("--param", fl.params, "parameter of f, name=value (repeatable)");

  auto* si = app.add_subcommand("simulate", "integrate Hamilton's equations and monitor conservation");
  add_common(si);
  add_realization(si);
  add_system(si);
  si->add_option("--q0", fl.q0, "initial coordinates");
  si->add_option("--p0", fl.p0, "initial momenta");
  si->add_option("--dt", fl.dt, "time step");
  si->add_option("--steps", fl.steps, "number of steps");
  si->add_option("--integrator", fl.integrator, "midpoint or rk4");
  si->add_option("--monitor", fl.monitors, "monitored integral by name (repeatable)");
  si->add_option("--trajectory", fl.trajectory, "write the trajectory CSV");
  si->add_option("--drift", fl.drift, "write the drift report JSON");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << detail::one_line(e.what()) << '\n';
    return exit_usage;
  }

  try {
    RunConfig c = fl.config.empty() ? RunConfig{} : load_config(fl.config);
    if (sc->parsed() && !fl.params.empty()) {
      for (const auto& a : fl.params) {
        const auto [k, v] = detail::split_assignment(a, "--param");
        c.scan.params[k] = detail::parse_list(v, "--param " + k).at(0);
      }
      fl.params.clear();
    }
    apply_flags(c, fl);
    if (catalog->parsed()) return cmd_catalog(c, out);
    if (va->parsed()) return cmd_verify_algebra(c, out);
    if (vi->parsed()) return cmd_verify_integrals(c, out);
    if (cu->parsed()) return cmd_curvature(c, out);
    if (tr->parsed()) return cmd_transform(c, out);
    if (sc->parsed()) return cmd_scan(c, out);
    if (si->parsed()) return cmd_simulate(c, out);
  } catch (const std::exception& e) {
    err << "error: " << detail::one_line(e.what()) << '\n';
    return exit_usage;
  }
  err << "error: no subcommand\n";
  return exit_usage;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args), out, err);
}

}  // namespace sl2c::cli
