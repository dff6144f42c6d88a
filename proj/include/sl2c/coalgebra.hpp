#pragma once

// sl(2) and sl_z(2) symplectic realizations on N canonical pairs, their
// Casimirs, the left/right families of coproduct integrals, and numerical
// verification of the Poisson relations they must satisfy.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sl2c/errors.hpp"
#include "sl2c/expr.hpp"
#include "sl2c/phase.hpp"
#include "sl2c/scalar.hpp"

namespace sl2c {

enum class RealizationKind { classical, deformed };

inline std::string to_string(RealizationKind k) {
  return k == RealizationKind::classical ? "classical" : "deformed";
}

/// Ordering of the sites inside a sub-realization. `ascending` reproduces the
/// N-fold coproduct: K_i = -(sum of q_k^2 over earlier sites) + (sum over later sites).
enum class SiteOrder { ascending, descending };

struct Realization {
  RealizationKind kind = RealizationKind::classical;
  std::size_t n = 2;
  double z = 0.0;          // deformation parameter, deformed only
  std::vector<double> b;   // centrifugal coefficients b_i

  static Realization classical(std::size_t n, std::vector<double> b = {}) {
    Realization r{RealizationKind::classical, n, 0.0, b.empty() ? std::vector<double>(n, 0.0) : std::move(b)};
    r.validate();
    return r;
  }

  static Realization deformed(std::size_t n, double z, std::vector<double> b = {}) {
    Realization r{RealizationKind::deformed, n, z, b.empty() ? std::vector<double>(n, 0.0) : std::move(b)};
    r.validate();
    return r;
  }

  void validate() const {
    if (n < 1) throw InvalidArgument("realization needs N >= 1");
    if (b.size() != n)
      throw InvalidArgument("b has " + std::to_string(b.size()) + " entries, expected N=" + std::to_string(n));
    for (double x : b)
      if (!std::isfinite(x)) throw InvalidArgument("b entries must be finite");
    if (!std::isfinite(z)) throw InvalidArgument("z must be finite");
    if (kind == RealizationKind::classical && z != 0.0)
      throw InvalidArgument("classical realization does not take z");
  }

  bool centrifugal_free() const {
    return std::all_of(b.begin(), b.end(), [](double x) { return x == 0.0; });
  }

  /// Sites whose q_i must not vanish (b_i != 0).
  std::vector<std::size_t> singular_sites(const std::vector<std::size_t>& sites = {}) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
      if (b[i] != 0.0 && (sites.empty() || std::find(sites.begin(), sites.end(), i) != sites.end()))
        out.push_back(i);
    return out;
  }
};

template <class S>
struct GeneratorValues {
  S jm, jp, j3;
};

/// Values of J-, J+, J3 at (q, p) restricted to `sites` (empty = all sites).
template <class S>
GeneratorValues<S> generator_values(const Realization& r, std::span<const S> q, std::span<const S> p,
                                    const std::vector<std::size_t>& sites = {},
                                    SiteOrder order = SiteOrder::ascending) {
  using std::exp;
  std::vector<std::size_t> all;
  if (sites.empty()) {
    all.resize(r.n);
    std::iota(all.begin(), all.end(), std::size_t{0});
  }
  const auto& idx = sites.empty() ? all : sites;
  GeneratorValues<S> g{S(0.0), S(0.0), S(0.0)};

  if (r.kind == RealizationKind::classical) {
    for (auto i : idx) {
      const S q2 = q[i] * q[i];
      g.jm += q2;
      S t = p[i] * p[i];
      if (r.b[i] != 0.0) t += r.b[i] / q2;
      g.jp += t;
      g.j3 += q[i] * p[i];
    }
    return g;
  }

  // Deformed: J+ and J3 carry sinhc(z q_i^2) and the ordering factor
  // exp(z K_i), where K_i sums q_k^2 over the other sites of `idx`, with sign
  // - for earlier sites and + for later ones (reversed for `descending`).
  const double sign = order == SiteOrder::ascending ? 1.0 : -1.0;
  const std::size_t m = idx.size();
  std::vector<S> q2(m);
  for (std::size_t k = 0; k < m; ++k) q2[k] = q[idx[k]] * q[idx[k]];
  for (std::size_t k = 0; k < m; ++k) {
    S before(0.0), after(0.0);
    for (std::size_t j = 0; j < k; ++j) before += q2[j];
    for (std::size_t j = k + 1; j < m; ++j) after += q2[j];
    const S kk = sign * (after - before);
    const S e = exp(r.z * kk);
    const S sc = sinhc(r.z * q2[k]);
    const auto i = idx[k];
    g.jm += q2[k];
    // z b / sinh(z q^2) written as b / (q^2 sinhc(z q^2)) so that z = 0 is exact.
    S t = sc * (p[i] * p[i]);
    if (r.b[i] != 0.0) t += r.b[i] / (q2[k] * sc);
    g.jp += t * e;
    g.j3 += sc * (q[i] * p[i]) * e;
  }
  return g;
}

/// Casimir of the applicable algebra from generator values:
/// classical J-J+ - J3^2, deformed sinh(zJ-)/z J+ - J3^2.
template <class S>
S casimir_value(const Realization& r, const GeneratorValues<S>& g) {
  if (r.kind == RealizationKind::classical) return g.jm * g.jp - g.j3 * g.j3;
  return sinhc(r.z * g.jm) * g.jm * g.jp - g.j3 * g.j3;
}

/// Casimir of the sub-realization on `sites` in the pairwise form
///   sum_{i<j} s_i s_j E_i E_j (q_i p_j - q_j p_i)^2
///   + sum_i b_i E_i / (s_i q_i^2) * sum_j s_j E_j q_j^2,
/// with s_i = sinhc(z q_i^2), E_i = exp(z K_i) (both 1 when classical). It
/// equals casimir_value() identically but avoids the cancellation between
/// sinh(zJ-)/z J+ and J3^2 when both are large.
template <class S>
S casimir_pairwise(const Realization& r, std::span<const S> q, std::span<const S> p,
                   const std::vector<std::size_t>& sites = {}, SiteOrder order = SiteOrder::ascending) {
  using std::exp;
  std::vector<std::size_t> idx = sites;
  if (idx.empty()) {
    idx.resize(r.n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  }
  const std::size_t m = idx.size();
  const bool deformed = r.kind == RealizationKind::deformed;
  const double sign = order == SiteOrder::ascending ? 1.0 : -1.0;
  std::vector<S> q2(m), w(m);
  for (std::size_t k = 0; k < m; ++k) q2[k] = q[idx[k]] * q[idx[k]];
  for (std::size_t k = 0; k < m; ++k) {
    if (!deformed) {
      w[k] = S(1.0);
      continue;
    }
    S before(0.0), after(0.0);
    for (std::size_t j = 0; j < k; ++j) before += q2[j];
    for (std::size_t j = k + 1; j < m; ++j) after += q2[j];
    w[k] = sinhc(r.z * q2[k]) * exp(r.z * (sign * (after - before)));
  }
  // w_k = s_k E_k; for the b terms E_k / s_k = w_k / s_k^2.
  S c(0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t bb = a + 1; bb < m; ++bb) {
      const S l = q[idx[a]] * p[idx[bb]] - q[idx[bb]] * p[idx[a]];
      c += w[a] * w[bb] * (l * l);
    }
  if (!r.centrifugal_free()) {
    S moment(0.0);
    for (std::size_t k = 0; k < m; ++k) moment += w[k] * q2[k];
    for (std::size_t k = 0; k < m; ++k) {
      const double bk = r.b[idx[k]];
      if (bk == 0.0) continue;
      const S sk = deformed ? sinhc(r.z * q2[k]) : S(1.0);
      c += bk * w[k] / (sk * sk * q2[k]) * moment;
    }
  }
  return c;
}

struct GeneratorSet {
  Observable jm, jp, j3;
};

inline GeneratorSet make_generators(const Realization& r, const std::vector<std::size_t>& sites = {},
                                    SiteOrder order = SiteOrder::ascending) {
  r.validate();
  const auto sing = r.singular_sites(sites);
  return {
      Observable("Jm", r.n, [r, sites, order](auto q, auto p) {
        return generator_values(r, q, p, sites, order).jm;
      }),
      Observable("Jp", r.n, [r, sites, order](auto q, auto p) {
        return generator_values(r, q, p, sites, order).jp;
      }, sing),
      Observable("J3", r.n, [r, sites, order](auto q, auto p) {
        return generator_values(r, q, p, sites, order).j3;
      }),
  };
}

inline Observable casimir(const Realization& r, const std::vector<std::size_t>& sites = {},
                          SiteOrder order = SiteOrder::ascending, std::string name = "C") {
  r.validate();
  return Observable(std::move(name), r.n, [r, sites, order](auto q, auto p) {
    return casimir_pairwise(r, q, p, sites, order);
  }, r.singular_sites(sites));
}

/// C^(m) (left, m = 2..N) and C_(m) (right, m = 2..N). The m = N member is the
/// same observable in both lists.
struct IntegralFamily {
  std::vector<Observable> left;
  std::vector<Observable> right;
  Observable casimir_full;

  /// Every distinct member, in the order left..., right members with m < N.
  std::vector<Observable> distinct() const {
    std::vector<Observable> out = left;
    for (std::size_t k = 0; k + 1 < right.size(); ++k) out.push_back(right[k]);
    return out;
  }
};

namespace detail {

inline std::vector<std::size_t> range_sites(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> s(hi - lo);
  std::iota(s.begin(), s.end(), lo);
  return s;
}

}  // namespace detail

/// Closed-form sl(2) coproduct integrals: on sites lo..hi-1,
///   sum_{i<j} (q_i p_j - q_j p_i)^2 + sum_i (b_i / q_i^2) sum_j q_j^2.
inline IntegralFamily classical_integrals(std::size_t n, std::vector<double> b = {}) {
  if (n < 2) throw InvalidArgument("integral families need N >= 2");
  if (b.empty()) b.assign(n, 0.0);
  if (b.size() != n) throw InvalidArgument("b has wrong length");
  const auto r = Realization::classical(n, b);
  IntegralFamily fam;
  for (std::size_t m = 2; m <= n; ++m)
    fam.left.push_back(casimir(r, detail::range_sites(0, m), SiteOrder::ascending, "C^(" + std::to_string(m) + ")"));
  fam.casimir_full = fam.left.back();
  for (std::size_t m = 2; m < n; ++m)
    fam.right.push_back(
        casimir(r, detail::range_sites(n - m, n), SiteOrder::ascending, "C_(" + std::to_string(m) + ")"));
  fam.right.push_back(fam.casimir_full);
  return fam;
}

/// sl_z(2) coproduct integrals, built as Casimirs of the left sub-realizations
/// on sites 1..m and the right ones on sites N-m+1..N.
inline IntegralFamily deformed_integrals(std::size_t n, double z, std::vector<double> b = {},
                                         SiteOrder right_order = SiteOrder::ascending) {
  if (n < 2) throw InvalidArgument("integral families need N >= 2");
  if (b.empty()) b.assign(n, 0.0);
  const auto r = Realization::deformed(n, z, b);
  IntegralFamily fam;
  for (std::size_t m = 2; m < n; ++m)
    fam.left.push_back(casimir(r, detail::range_sites(0, m), SiteOrder::ascending,
                               "C_z^(" + std::to_string(m) + ")"));
  fam.casimir_full = casimir(r, {}, SiteOrder::ascending, "C_z^(" + std::to_string(n) + ")");
  fam.left.push_back(fam.casimir_full);
  for (std::size_t m = 2; m < n; ++m)
    fam.right.push_back(casimir(r, detail::range_sites(n - m, n), right_order,
                                "C_z_(" + std::to_string(m) + ")"));
  fam.right.push_back(fam.casimir_full);
  return fam;
}

/// The integral family that matches a realization.
inline IntegralFamily integrals_for(const Realization& r, SiteOrder right_order = SiteOrder::ascending) {
  return r.kind == RealizationKind::classical ? classical_integrals(r.n, r.b)
                                              : deformed_integrals(r.n, r.z, r.b, right_order);
}

/// Extra integral of the maximally superintegrable deformed system
/// (1/2) J+ exp(sign z J-) on N = 2:
///   sign = +1: sinhc(z q1^2)/2 * exp(z q1^2) * p1^2
///   sign = -1: sinhc(z q2^2)/2 * exp(-z q2^2) * p2^2
inline Observable extra_integral_ms(double z, double sign = 1.0) {
  if (sign != 1.0 && sign != -1.0) throw InvalidArgument("sign must be +1 or -1");
  const std::size_t site = sign > 0 ? 0 : 1;
  return Observable("I_z", 2, [z, sign, site](auto q, auto p) {
    using std::exp;
    const auto x = z * (q[site] * q[site]);
    return sinhc(x) / 2.0 * exp(sign * x) * (p[site] * p[site]);
  });
}

// ---------------------------------------------------------------------------
// Observables from expressions

namespace detail {

inline std::vector<std::string> canonical_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back("q" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) out.push_back("p" + std::to_string(i));
  return out;
}

inline void check_param_names(const std::map<std::string, double>& params,
                              const std::vector<std::string>& reserved) {
  for (const auto& [k, v] : params) {
    if (std::find(reserved.begin(), reserved.end(), k) != reserved.end())
      throw InvalidArgument("parameter name '" + k + "' clashes with a reserved symbol");
    if (!std::isfinite(v)) throw InvalidArgument("parameter '" + k + "' must be finite");
  }
}

}  // namespace detail

/// Compiles an expression over Jm, Jp, J3, q1..qN, p1..pN (and z for deformed
/// realizations) plus named parameters into an Observable.
inline Observable compile(const expr::Ast& ast, const Realization& r,
                          const std::map<std::string, double>& params = {}, std::string name = {}) {
  r.validate();
  std::vector<std::string> slots{"Jm", "Jp", "J3"};
  const auto canon = detail::canonical_names(r.n);
  slots.insert(slots.end(), canon.begin(), canon.end());
  if (r.kind == RealizationKind::deformed) slots.push_back("z");
  detail::check_param_names(params, slots);
  std::vector<double> values;
  for (const auto& [k, v] : params) {
    slots.push_back(k);
    values.push_back(v);
  }
  const expr::Program prog(ast, slots);
  const bool uses_gen = prog.uses("Jm") || prog.uses("Jp") || prog.uses("J3");
  const std::size_t n = r.n;
  const std::size_t fixed = 3 + 2 * n;
  if (r.kind == RealizationKind::deformed) values.insert(values.begin(), r.z);
  if (name.empty()) name = expr::to_string(ast);
  std::vector<std::size_t> sing;
  if (prog.uses("Jp")) sing = r.singular_sites();
  return Observable(std::move(name), n, [prog, r, uses_gen, n, fixed, values](auto q, auto p) {
    using S = typename decltype(q)::value_type;
    std::vector<S> v(fixed + values.size());
    if (uses_gen) {
      const auto g = generator_values(r, q, p);
      v[0] = g.jm;
      v[1] = g.jp;
      v[2] = g.j3;
    }
    for (std::size_t i = 0; i < n; ++i) {
      v[3 + i] = q[i];
      v[3 + n + i] = p[i];
    }
    for (std::size_t k = 0; k < values.size(); ++k) v[fixed + k] = S(values[k]);
    return prog(std::span<const S>(v));
  }, sing);
}

/// Compiles an expression purely in q1..qN, p1..pN and parameters.
inline Observable compile_raw(const expr::Ast& ast, std::size_t n, const std::map<std::string, double>& params = {},
                              std::string name = {}) {
  if (n < 1) throw InvalidArgument("raw observable needs N >= 1");
  auto slots = detail::canonical_names(n);
  detail::check_param_names(params, slots);
  std::vector<double> values;
  for (const auto& [k, v] : params) {
    slots.push_back(k);
    values.push_back(v);
  }
  const expr::Program prog(ast, slots);
  if (name.empty()) name = expr::to_string(ast);
  return Observable(std::move(name), n, [prog, n, values](auto q, auto p) {
    using S = typename decltype(q)::value_type;
    std::vector<S> v(2 * n + values.size());
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = q[i];
      v[n + i] = p[i];
    }
    for (std::size_t k = 0; k < values.size(); ++k) v[2 * n + k] = S(values[k]);
    return prog(std::span<const S>(v));
  });
}

// ---------------------------------------------------------------------------
// Verification

struct CheckResult {
  std::string relation;
  double max_residual = 0.0;
};

struct VerificationReport {
  std::string relation;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  double max_residual = 0.0;
  std::string worst_relation;
  PhaseState worst_state;
  bool pass = false;
  std::vector<CheckResult> checks;
};

/// Residual of an identity lhs = rhs, scaled by 1 + max(|lhs|, |rhs|).
inline double scaled_residual(double lhs, double rhs) {
  return std::abs(lhs - rhs) / (1.0 + std::max(std::abs(lhs), std::abs(rhs)));
}

/// Residual of {f, g} = 0 scaled by 1 + max(|f|, |g|, |{f,g}|).
inline double involution_residual(double f, double g, double bracket) {
  return std::abs(bracket) / (1.0 + std::max({std::abs(f), std::abs(g), std::abs(bracket)}));
}

namespace detail {

struct ReportBuilder {
  VerificationReport rep;

  ReportBuilder(std::string relation, std::size_t samples, std::uint64_t seed, double tol) {
    rep.relation = std::move(relation);
    rep.samples = samples;
    rep.seed = seed;
    rep.tol = tol;
  }

  void record(std::size_t check, const std::string& name, double residual, const PhaseState& s) {
    if (rep.checks.size() <= check) rep.checks.resize(check + 1);
    auto& c = rep.checks[check];
    c.relation = name;
    // NaN counts as the worst possible residual
    const double r = std::isnan(residual) ? INFINITY : residual;
    c.max_residual = std::max(c.max_residual, r);
    if (rep.worst_relation.empty() || r > rep.max_residual) {
      rep.max_residual = r;
      rep.worst_relation = name;
      rep.worst_state = s;
    }
  }

  VerificationReport finish() {
    rep.pass = rep.max_residual <= rep.tol;
    return rep;
  }
};

}  // namespace detail

/// Checks the bracket relations of the given generators and the centrality of
/// `cas`: classical {J3,J+}=2J+, {J3,J-}=-2J-, {J-,J+}=4J3; deformed
/// {J3,J+}=2J+cosh(zJ-), {J3,J-}=-2sinh(zJ-)/z, {J-,J+}=4J3.
inline VerificationReport verify_relations(const GeneratorSet& g, const Observable& cas, RealizationKind kind,
                                           double z, std::size_t samples, double tol, std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("samples must be >= 1");
  detail::ReportBuilder b(to_string(kind) + " algebra relations and Casimir centrality", samples, seed, tol);
  StateSampler sampler(seed);
  const std::size_t n = g.jm.dim();
  for (std::size_t k = 0; k < samples; ++k) {
    const PhaseState s = sampler.next(n);
    const auto gm = extended_gradient(g.jm, s), gp = extended_gradient(g.jp, s), g3 = extended_gradient(g.j3, s),
               gc = extended_gradient(cas, s);
    const auto pb = [](const ExtendedGradient& a, const ExtendedGradient& c) {
      return static_cast<double>(poisson_bracket(a, c));
    };
    const double jm = evaluate(g.jm, s), jp = evaluate(g.jp, s), j3 = evaluate(g.j3, s), c = evaluate(cas, s);
    const bool deformed = kind == RealizationKind::deformed;
    const double rhs_3p = deformed ? 2.0 * jp * std::cosh(z * jm) : 2.0 * jp;
    const double rhs_3m = deformed ? -2.0 * sinhc(z * jm) * jm : -2.0 * jm;
    b.record(0, deformed ? "{J3,Jp} = 2 Jp cosh(z Jm)" : "{J3,Jp} = 2 Jp",
             scaled_residual(pb(g3, gp), rhs_3p), s);
    b.record(1, deformed ? "{J3,Jm} = -2 sinh(z Jm)/z" : "{J3,Jm} = -2 Jm",
             scaled_residual(pb(g3, gm), rhs_3m), s);
    b.record(2, "{Jm,Jp} = 4 J3", scaled_residual(pb(gm, gp), 4.0 * j3), s);
    const double cm = pb(gc, gm), cp = pb(gc, gp), c3 = pb(gc, g3);
    b.record(3, "{C,Jm} = 0", involution_residual(c, jm, cm), s);
    b.record(4, "{C,Jp} = 0", involution_residual(c, jp, cp), s);
    b.record(5, "{C,J3} = 0", involution_residual(c, j3, c3), s);
  }
  return b.finish();
}

inline VerificationReport verify_algebra(const Realization& r, std::size_t samples = 100, double tol = 1e-9,
                                         std::uint64_t seed = 42) {
  return verify_relations(make_generators(r), casimir(r), r.kind, r.z, samples, tol, seed);
}

/// {H, C^(m)} = 0, {H, C_(m)} = 0 and mutual involution inside each family.
inline VerificationReport verify_involution(const Observable& h, const IntegralFamily& fam, std::size_t samples = 100,
                                            double tol = 1e-9, std::uint64_t seed = 42) {
  if (samples < 1) throw InvalidArgument("samples must be >= 1");
  detail::ReportBuilder b("involution of " + h.name() + " with coproduct integrals", samples, seed, tol);
  struct Pair {
    std::string name;
    const Observable* f;
    const Observable* g;
  };
  std::vector<Pair> pairs;
  for (const auto& c : fam.left) pairs.push_back({"{H," + c.name() + "}", &h, &c});
  for (std::size_t k = 0; k + 1 < fam.right.size(); ++k)
    pairs.push_back({"{H," + fam.right[k].name() + "}", &h, &fam.right[k]});
  for (std::size_t a = 0; a < fam.left.size(); ++a)
    for (std::size_t c = a + 1; c < fam.left.size(); ++c)
      pairs.push_back({"{" + fam.left[a].name() + "," + fam.left[c].name() + "}", &fam.left[a], &fam.left[c]});
  for (std::size_t a = 0; a < fam.right.size(); ++a)
    for (std::size_t c = a + 1; c < fam.right.size(); ++c)
      pairs.push_back(
          {"{" + fam.right[a].name() + "," + fam.right[c].name() + "}", &fam.right[a], &fam.right[c]});

  StateSampler sampler(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    const PhaseState s = sampler.next(h.dim());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& pr = pairs[i];
      const double br = poisson_bracket(*pr.f, *pr.g, s);
      b.record(i, pr.name, involution_residual(evaluate(*pr.f, s), evaluate(*pr.g, s), br), s);
    }
  }
  return b.finish();
}

/// Numerical rank of the stacked gradient matrix (rows: observables, columns:
/// d/dq_1..d/dq_N, d/dp_1..d/dp_N); maximum over the given states.
inline int functional_independence(const std::vector<Observable>& obs, const std::vector<PhaseState>& states,
                                   double rank_tol = 1e-8) {
  if (states.empty()) throw InvalidArgument("functional_independence needs at least one state");
  int best = 0;
  for (const auto& s : states) {
    const auto n = static_cast<Eigen::Index>(s.dim());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(obs.size()), 2 * n);
    for (std::size_t r = 0; r < obs.size(); ++r) {
      const auto g = gradient(obs[r], s);
      for (Eigen::Index i = 0; i < n; ++i) {
        m(static_cast<Eigen::Index>(r), i) = g.dq[static_cast<std::size_t>(i)];
        m(static_cast<Eigen::Index>(r), n + i) = g.dp[static_cast<std::size_t>(i)];
      }
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) continue;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) >= rank_tol * sv(0)) ++rank;
    best = std::max(best, rank);
  }
  return best;
}

}  // namespace sl2c
