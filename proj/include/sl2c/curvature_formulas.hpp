#pragma once

// Closed-form Gaussian curvature of the radial f-families on N = 2.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sl2c/errors.hpp"
#include "sl2c/expr.hpp"
#include "sl2c/scalar.hpp"

namespace sl2c {

struct FunctionJet {
  double f, df, d2f;
};

/// f, f' and f'' of a one-variable expression in `x` at `x`, by one hyper-dual pass.
inline FunctionJet function_jet(const expr::Ast& f, double x, const std::map<std::string, double>& params = {}) {
  std::vector<std::string> slots{"x"};
  std::vector<D2> values{D2(D1(x, 1.0), D1(1.0, 0.0))};
  for (const auto& [k, v] : params) {
    if (k == "x") continue;
    slots.push_back(k);
    values.emplace_back(v);
  }
  const expr::Program prog(f, slots);
  const D2 r = prog(std::span<const D2>(values));
  return {r.v.v, r.v.d, r.d.d};
}

/// Curvature of ds^2 = (2/f(q^2)) dq^2 at q^2 = x:
///   K = f'(x) + x f''(x) - x f'(x)^2 / f(x)
inline double curvature_f_classical(const expr::Ast& f, double x, const std::map<std::string, double>& params = {}) {
  const auto j = function_jet(f, x, params);
  if (j.f == 0.0) throw DomainError("f vanishes at x = " + std::to_string(x));
  return j.df + x * j.d2f - x * j.df * j.df / j.f;
}

/// Curvature of the space generated by (1/2) J+ f(z J-) on the deformed
/// realization, at x = z q^2:
///   K = z (f' cosh x + (f'' - f - f'^2/f) sinh x)
inline double curvature_f_deformed(const expr::Ast& f, double x, double z,
                                   const std::map<std::string, double>& params = {}) {
  const auto j = function_jet(f, x, params);
  if (j.f == 0.0) throw DomainError("f vanishes at x = " + std::to_string(x));
  return z * (j.df * std::cosh(x) + (j.d2f - j.f - j.df * j.df / j.f) * std::sinh(x));
}

}  // namespace sl2c
