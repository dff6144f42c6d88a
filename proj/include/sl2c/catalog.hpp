#pragma once

// Named Hamiltonians built on the sl(2) and sl_z(2) realizations.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sl2c/coalgebra.hpp"
#include "sl2c/curvature_formulas.hpp"
#include "sl2c/errors.hpp"
#include "sl2c/expr.hpp"

namespace sl2c {

/// Factor c in ds^2 = c A(q)^{-1} where A is the momentum Hessian of H.
/// paper_f uses c = 2 (ds^2 = 2/f dq^2 for H = f J+/2); lagrangian uses c = 1.
enum class MetricConvention { lagrangian, paper_f };

inline std::string to_string(MetricConvention c) {
  return c == MetricConvention::lagrangian ? "lagrangian" : "paper-f";
}

inline double metric_factor(MetricConvention c) { return c == MetricConvention::lagrangian ? 1.0 : 2.0; }

/// Closed-form Gaussian curvature known for an N = 2, b = 0 catalog system.
struct KnownCurvature {
  std::string formula;
  std::function<double(double q1, double q2)> at;
};

struct SystemSpec {
  std::string name;
  Realization realization;
  Observable hamiltonian;
  expr::Ast hamiltonian_ast;
  std::map<std::string, double> params;
  std::map<std::string, std::string> exprs;
  MetricConvention metric_convention = MetricConvention::paper_f;
  std::optional<KnownCurvature> known_curvature;
};

struct CatalogEntry {
  std::string name;
  std::vector<std::string> params;  // real parameters
  std::vector<std::string> exprs;   // expression parameters (single variable x unless noted)
  std::string anchor;               // what the entry describes
  RealizationKind kind;
};

struct SystemRequest {
  std::string name;
  std::map<std::string, double> params;
  std::map<std::string, std::string> exprs;
  Realization realization;
};

inline const std::vector<CatalogEntry>& list_catalog() {
  static const std::vector<CatalogEntry> entries{
      {"euclidean", {}, {}, "free motion on flat space, H = J+/2", RealizationKind::classical},
      {"poincare", {"kappa"}, {}, "constant curvature in Poincare (stereographic) coordinates, H = (1+kappa J-)^2 J+/2",
       RealizationKind::classical},
      {"beltrami", {"kappa"}, {}, "constant curvature in Beltrami (central projection) coordinates, "
       "H = (1+kappa J-)(J+ + kappa J3^2)/2", RealizationKind::classical},
      {"f_family", {}, {"f"}, "radial family H = f(J-) J+/2 with ds^2 = 2/f(q^2) dq^2", RealizationKind::classical},
      {"darboux3", {"alpha"}, {}, "Darboux space of type III, H = J+/(2(alpha + J-))", RealizationKind::classical},
      {"j3sq", {"alpha"}, {}, "H = J+/2 + alpha J3^2, constant curvature -alpha", RealizationKind::classical},
      {"j3sq_jm", {"alpha"}, {}, "H = J+/2 + alpha J- J3^2, curvature -2 alpha q^2", RealizationKind::classical},
      {"potential", {}, {"T", "V"}, "kinetic term T(J-,J+,J3) plus central potential V(J-)",
       RealizationKind::classical},
      {"z_f_family", {}, {"f"}, "deformed radial family H = J+ f(z J-)/2 with f(0) = 1", RealizationKind::deformed},
      {"z_type_I", {}, {}, "deformed free motion H = J+/2, curvature -z sinh(z q^2)", RealizationKind::deformed},
      {"z_ms", {"sign"}, {}, "maximally superintegrable H = J+ exp(sign z J-)/2, curvature sign*z",
       RealizationKind::deformed},
      {"z_j3sq", {"alpha"}, {}, "deformed H = J+/2 + alpha J3^2", RealizationKind::deformed},
      {"z_potential", {}, {"f", "U"}, "deformed H = J+ f(z J-)/2 + U(z J-)", RealizationKind::deformed},
  };
  return entries;
}

inline const CatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : list_catalog())
    if (e.name == name) return e;
  std::string names;
  for (const auto& e : list_catalog()) names += (names.empty() ? "" : ", ") + e.name;
  throw InvalidArgument("unknown system '" + name + "'; known systems: " + names);
}

namespace detail {

inline expr::Ast parse_named(const std::map<std::string, std::string>& exprs, const std::string& key) {
  const auto it = exprs.find(key);
  if (it == exprs.end()) throw InvalidArgument("missing expression parameter '" + key + "'");
  try {
    return expr::parse(it->second);
  } catch (const ParseError& e) {
    throw ParseError("in expression '" + key + "': " + e.what(), e.position(), e.expected());
  }
}

inline bool is_reserved(const std::string& s) {
  if (s == "Jm" || s == "Jp" || s == "J3" || s == "z" || s == "x") return true;
  if (s.size() >= 2 && (s[0] == 'q' || s[0] == 'p') &&
      s.find_first_not_of("0123456789", 1) == std::string::npos)
    return true;
  return false;
}

/// lim_{x->0} f(x) = 1, probed at x = 1e-8.
inline void require_unit_limit(const expr::Ast& f, const std::map<std::string, double>& params,
                               const std::string& key) {
  const double v = function_jet(f, 1e-8, params).f;
  if (!(std::abs(v - 1.0) <= 1e-6))
    throw InvalidArgument("expression '" + key + "' must satisfy f(x) -> 1 as x -> 0 (f(1e-8) = " +
                          std::to_string(v) + ")");
}

}  // namespace detail

inline SystemSpec build(const SystemRequest& req) {
  using namespace expr;
  const CatalogEntry& entry = catalog_entry(req.name);
  const Realization& r = req.realization;
  r.validate();
  if (r.kind != entry.kind)
    throw InvalidArgument("system '" + req.name + "' requires a " + to_string(entry.kind) + " realization");

  for (const auto& [k, v] : req.exprs)
    if (std::find(entry.exprs.begin(), entry.exprs.end(), k) == entry.exprs.end())
      throw InvalidArgument("system '" + req.name + "' takes no expression parameter '" + k + "'");

  std::map<std::string, Ast> ex;
  for (const auto& k : entry.exprs) ex[k] = sl2c::detail::parse_named(req.exprs, k);

  // Required real parameters: the declared ones plus free symbols of the
  // supplied expressions.
  std::set<std::string> required(entry.params.begin(), entry.params.end());
  for (const auto& [k, a] : ex)
    for (const auto& s : symbols(a))
      if (!sl2c::detail::is_reserved(s)) required.insert(s);
  for (const auto& s : required)
    if (!req.params.count(s)) throw InvalidArgument("system '" + req.name + "' is missing parameter '" + s + "'");
  for (const auto& [k, v] : req.params)
    if (!required.count(k)) throw InvalidArgument("system '" + req.name + "' takes no parameter '" + k + "'");

  const auto P = [&](const std::string& k) { return req.params.at(k); };
  const Ast jm = symbol("Jm"), jp = symbol("Jp"), half_jp = binary(BinaryOp::div, jp, constant(2.0));
  const Ast zjm = binary(BinaryOp::mul, symbol("z"), jm);

  SystemSpec spec;
  spec.name = req.name;
  spec.realization = r;
  spec.params = req.params;
  spec.exprs = req.exprs;
  spec.metric_convention = MetricConvention::paper_f;
  const double z = r.z;
  Ast h;

  if (req.name == "euclidean") {
    h = parse("Jp/2");
    spec.known_curvature = KnownCurvature{"0", [](double, double) { return 0.0; }};
  } else if (req.name == "poincare") {
    h = parse("(1+kappa*Jm)^2*Jp/2");
    // With ds^2 = 2 A^{-1} this Hamiltonian has f = (1+kappa x)^2, so K = 2 kappa;
    // K = kappa belongs to f = (1+kappa x)^2/2.
    const double k = P("kappa");
    spec.known_curvature = KnownCurvature{"2*kappa", [k](double, double) { return 2.0 * k; }};
  } else if (req.name == "beltrami") {
    h = parse("(1+kappa*Jm)*(Jp+kappa*J3^2)/2");
    spec.metric_convention = MetricConvention::lagrangian;
    const double k = P("kappa");
    spec.known_curvature = KnownCurvature{"kappa", [k](double, double) { return k; }};
  } else if (req.name == "f_family") {
    const Ast f = ex.at("f");
    h = binary(BinaryOp::mul, substitute(f, "x", jm), half_jp);
    auto params = req.params;
    spec.known_curvature = KnownCurvature{"f' + x f'' - x f'^2/f at x = q^2", [f, params](double a, double b) {
                                            return curvature_f_classical(f, a * a + b * b, params);
                                          }};
  } else if (req.name == "darboux3") {
    h = parse("Jp/2/(alpha+Jm)");
    const double a = P("alpha");
    spec.known_curvature = KnownCurvature{"-alpha/(alpha+q^2)^3", [a](double q1, double q2) {
                                            const double s = a + q1 * q1 + q2 * q2;
                                            return -a / (s * s * s);
                                          }};
  } else if (req.name == "j3sq") {
    h = parse("Jp/2 + alpha*J3^2");
    const double a = P("alpha");
    spec.known_curvature = KnownCurvature{"-alpha", [a](double, double) { return -a; }};
  } else if (req.name == "j3sq_jm") {
    h = parse("Jp/2 + alpha*Jm*J3^2");
    const double a = P("alpha");
    spec.known_curvature = KnownCurvature{"-2*alpha*q^2", [a](double q1, double q2) {
                                            return -2.0 * a * (q1 * q1 + q2 * q2);
                                          }};
  } else if (req.name == "potential") {
    for (const auto& s : symbols(ex.at("T")))
      if (s == "x") throw InvalidArgument("expression 'T' is written in Jm, Jp, J3, not x");
    h = binary(BinaryOp::add, ex.at("T"), substitute(ex.at("V"), "x", jm));
  } else if (req.name == "z_f_family") {
    const Ast f = ex.at("f");
    sl2c::detail::require_unit_limit(f, req.params, "f");
    h = binary(BinaryOp::mul, half_jp, substitute(f, "x", zjm));
    auto params = req.params;
    spec.known_curvature = KnownCurvature{"z (f' cosh x + (f'' - f - f'^2/f) sinh x) at x = z q^2",
                                          [f, params, z](double a, double b) {
                                            return curvature_f_deformed(f, z * (a * a + b * b), z, params);
                                          }};
  } else if (req.name == "z_type_I") {
    h = half_jp;
    spec.known_curvature = KnownCurvature{"-z*sinh(z*q^2)", [z](double q1, double q2) {
                                            return -z * std::sinh(z * (q1 * q1 + q2 * q2));
                                          }};
  } else if (req.name == "z_ms") {
    const double sg = P("sign");
    if (sg != 1.0 && sg != -1.0) throw InvalidArgument("parameter 'sign' must be +1 or -1");
    h = parse("Jp/2*exp(sign*z*Jm)");
    spec.known_curvature = KnownCurvature{"sign*z", [sg, z](double, double) { return sg * z; }};
  } else if (req.name == "z_j3sq") {
    h = parse("Jp/2 + alpha*J3^2");
    const double a = P("alpha");
    spec.known_curvature =
        KnownCurvature{"alpha/2 - 3 alpha/2 cosh(2 z q^2) - z sinh(z q^2)", [a, z](double q1, double q2) {
                         const double x = z * (q1 * q1 + q2 * q2);
                         return a / 2.0 - 1.5 * a * std::cosh(2.0 * x) - z * std::sinh(x);
                       }};
  } else if (req.name == "z_potential") {
    const Ast f = ex.at("f");
    sl2c::detail::require_unit_limit(f, req.params, "f");
    h = binary(BinaryOp::add, binary(BinaryOp::mul, half_jp, substitute(f, "x", zjm)),
               substitute(ex.at("U"), "x", zjm));
  }

  spec.hamiltonian_ast = h;
  spec.hamiltonian = compile(h, r, req.params, "H");
  return spec;
}

inline SystemSpec build(const std::string& name, const std::map<std::string, double>& params, const Realization& r,
                        const std::map<std::string, std::string>& exprs = {}) {
  return build(SystemRequest{name, params, exprs, r});
}

}  // namespace sl2c
