#pragma once

// Metrics induced by kinetic Hamiltonians on N = 2, Gaussian curvature, and
// the geodesic polar chart of the deformed spaces.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "sl2c/catalog.hpp"
#include "sl2c/curvature_formulas.hpp"
#include "sl2c/errors.hpp"
#include "sl2c/phase.hpp"
#include "sl2c/scalar.hpp"

namespace sl2c {

using Matrix2 = std::array<std::array<double, 2>, 2>;

template <class S>
using MetricFunction = std::function<std::array<S, 3>(const S&, const S&)>;

/// ds^2 = E du^2 + 2F du dv + G dv^2 with differentiable components.
class Metric2D {
 public:
  Metric2D() = default;

  /// `f(u, v)` returns {E, F, G} for S in {double, D1, D2}.
  template <class F>
  explicit Metric2D(F f, MetricConvention convention = MetricConvention::paper_f, bool riemannian = true)
      : fns_{MetricFunction<double>(f), MetricFunction<D1>(f), MetricFunction<D2>(f)},
        convention_(convention),
        riemannian_(riemannian) {}

  template <class S>
  std::array<S, 3> operator()(const S& u, const S& v) const {
    return std::get<MetricFunction<S>>(fns_)(u, v);
  }

  Matrix2 matrix(double u, double v) const {
    const auto [e, f, g] = (*this)(u, v);
    return {{{e, f}, {f, g}}};
  }

  MetricConvention convention() const noexcept { return convention_; }
  /// False for signed (Lorentzian) metrics, where positivity checks are skipped.
  bool riemannian() const noexcept { return riemannian_; }

 private:
  std::tuple<MetricFunction<double>, MetricFunction<D1>, MetricFunction<D2>> fns_;
  MetricConvention convention_ = MetricConvention::paper_f;
  bool riemannian_ = true;
};

namespace detail {

inline void require_planar_kinetic(const SystemSpec& spec) {
  if (spec.realization.n != 2)
    throw InvalidArgument("metric extraction needs N = 2 (system has N = " + std::to_string(spec.realization.n) + ")");
  if (!spec.realization.centrifugal_free())
    throw InvalidArgument("metric extraction needs b = 0 (centrifugal terms are not kinetic)");
}

inline double max_abs(const Matrix2& m) {
  return std::max({std::abs(m[0][0]), std::abs(m[0][1]), std::abs(m[1][1])});
}

}  // namespace detail

/// Throws unless H is a homogeneous quadratic form in p at q: the gradient in
/// p at p = 0 and all third p-derivatives must vanish.
inline void require_quadratic_in_p(const Observable& h, double q1, double q2, double scale) {
  const double tol = 1e-12 * (1.0 + scale);
  const auto g = gradient(h, PhaseState({q1, q2}, {0.0, 0.0}));
  if (std::abs(g.dp[0]) > tol || std::abs(g.dp[1]) > tol)
    throw InvalidArgument("Hamiltonian has terms linear in p; it does not define a metric");
  const std::array<std::array<int, 3>, 4> combos{{{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}}};
  const std::array<double, 2> p0{0.31, -0.73};
  for (const auto& c : combos) {
    std::vector<D3> q{D3(q1), D3(q2)};
    std::vector<D3> p{D3(p0[0]), D3(p0[1])};
    p[static_cast<std::size_t>(c[0])].v.v.d += 1.0;
    p[static_cast<std::size_t>(c[1])].v.d.v += 1.0;
    p[static_cast<std::size_t>(c[2])].d.v.v += 1.0;
    const D3 r = h(std::span<const D3>(q), std::span<const D3>(p));
    if (!(std::abs(r.d.d.d) <= tol))
      throw InvalidArgument("Hamiltonian is not quadratic in p (third momentum derivative " +
                            std::to_string(r.d.d.d) + ")");
  }
}

/// Metric matrix c A(q)^{-1} at q, with A the momentum Hessian and c set by the
/// system's convention.
inline Matrix2 extract_metric(const SystemSpec& spec, double q1, double q2) {
  detail::require_planar_kinetic(spec);
  const auto h = hessian_pp(spec.hamiltonian, PhaseState({q1, q2}, {0.0, 0.0}));
  const Matrix2 a{{{h[0][0], h[0][1]}, {h[1][0], h[1][1]}}};
  require_quadratic_in_p(spec.hamiltonian, q1, q2, detail::max_abs(a));
  const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  const double s = detail::max_abs(a);
  if (!std::isfinite(det) || std::abs(det) <= 1e-14 * s * s)
    throw DomainError("momentum Hessian is singular at q = (" + std::to_string(q1) + ", " + std::to_string(q2) + ")");
  const double c = metric_factor(spec.metric_convention);
  return {{{c * a[1][1] / det, -c * a[0][1] / det}, {-c * a[1][0] / det, c * a[0][0] / det}}};
}

/// The metric of a kinetic system as a differentiable field. The momentum
/// Hessian is recovered by polarization, H(q, e_i + e_j) - H(q, e_i) -
/// H(q, e_j) + H(q, 0), which is exact for Hamiltonians quadratic in p.
inline Metric2D metric_of(const SystemSpec& spec) {
  detail::require_planar_kinetic(spec);
  const Observable h = spec.hamiltonian;
  const double c = metric_factor(spec.metric_convention);
  return Metric2D(
      [h, c](const auto& u, const auto& v) {
        using S = std::decay_t<decltype(u)>;
        const std::array<S, 2> q{u, v};
        const auto at = [&](double a, double b) {
          const std::array<S, 2> p{S(a), S(b)};
          return h(std::span<const S>(q), std::span<const S>(p));
        };
        const S h0 = at(0, 0), h1 = at(1, 0), h2 = at(0, 1), h12 = at(1, 1);
        const S a11 = 2.0 * (h1 - h0), a22 = 2.0 * (h2 - h0), a12 = h12 - h1 - h2 + h0;
        const S det = a11 * a22 - a12 * a12;
        return std::array<S, 3>{c * a22 / det, -c * a12 / det, c * a11 / det};
      },
      spec.metric_convention);
}

/// Gaussian curvature by the Brioschi formula; all derivatives of E, F, G come
/// from three hyper-dual evaluations.
inline double gauss_curvature_brioschi(const Metric2D& m, double u, double v) {
  const auto eval = [&](D2 a, D2 b) { return m(a, b); };
  // uu pass: d/du and d2/du2; vv pass likewise; uv pass for the mixed term.
  const auto uu = eval(D2(D1(u, 1.0), D1(1.0, 0.0)), D2(v));
  const auto vv = eval(D2(u), D2(D1(v, 1.0), D1(1.0, 0.0)));
  const auto uv = eval(D2(D1(u, 1.0), D1(0.0, 0.0)), D2(D1(v, 0.0), D1(1.0, 0.0)));

  const double e = uu[0].v.v, f = uu[1].v.v, g = uu[2].v.v;
  const double det = e * g - f * f;
  if (!std::isfinite(det) || det == 0.0)
    throw DomainError("degenerate metric at (" + std::to_string(u) + ", " + std::to_string(v) + ")");
  if (m.riemannian() && (e <= 0.0 || det <= 0.0))
    throw DomainError("metric is not positive-definite at (" + std::to_string(u) + ", " + std::to_string(v) + ")");

  const double eu = uu[0].v.d, fu = uu[1].v.d, gu = uu[2].v.d;
  const double ev = vv[0].v.d, fv = vv[1].v.d, gv = vv[2].v.d;
  const double guu = uu[2].d.d, evv = vv[0].d.d, fuv = uv[1].d.d;

  const auto det3 = [](const std::array<std::array<double, 3>, 3>& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const std::array<std::array<double, 3>, 3> m1{{
      {-0.5 * evv + fuv - 0.5 * guu, 0.5 * eu, fu - 0.5 * ev},
      {fv - 0.5 * gu, e, f},
      {0.5 * gv, f, g},
  }};
  const std::array<std::array<double, 3>, 3> m2{{
      {0.0, 0.5 * ev, 0.5 * gu},
      {0.5 * ev, e, f},
      {0.5 * gu, f, g},
  }};
  return (det3(m1) - det3(m2)) / (det * det);
}

struct CurvaturePoint {
  double q1, q2;
  std::optional<double> k_closed;
  double k_brioschi;
};

struct CurvatureReport {
  std::string system;
  std::string formula;  // empty when no closed form is known
  std::vector<CurvaturePoint> points;
  double max_discrepancy = 0.0;           // max |K_closed - K_brioschi|
  double max_relative_discrepancy = 0.0;  // max |K_closed - K_brioschi| / (1 + |K_closed|)
};

inline CurvatureReport curvature_report(const SystemSpec& spec, const std::vector<std::array<double, 2>>& pts) {
  const Metric2D m = metric_of(spec);
  CurvatureReport rep;
  rep.system = spec.name;
  if (spec.known_curvature) rep.formula = spec.known_curvature->formula;
  for (const auto& [a, b] : pts) {
    require_quadratic_in_p(spec.hamiltonian, a, b, 1.0);
    CurvaturePoint cp{a, b, std::nullopt, gauss_curvature_brioschi(m, a, b)};
    if (spec.known_curvature) {
      const double k = spec.known_curvature->at(a, b);
      cp.k_closed = k;
      const double d = std::abs(k - cp.k_brioschi);
      rep.max_discrepancy = std::max(rep.max_discrepancy, d);
      rep.max_relative_discrepancy = std::max(rep.max_relative_discrepancy, d / (1.0 + std::abs(k)));
    }
    rep.points.push_back(cp);
  }
  return rep;
}

/// Uniform n x n grid on [lo, hi]^2.
inline std::vector<std::array<double, 2>> grid_points(double lo, double hi, std::size_t n) {
  std::vector<std::array<double, 2>> pts;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double t1 = n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
      const double t2 = n == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(n - 1);
      pts.push_back({lo + (hi - lo) * t1, lo + (hi - lo) * t2});
    }
  return pts;
}

// ---------------------------------------------------------------------------
// Constant-curvature scan of the deformed f-family

struct ScanVerdict {
  bool constant = false;
  double k_mean = 0.0, k_min = 0.0, k_max = 0.0;
  std::vector<double> x, k;
};

/// K(x) over `count` uniform points of [x_min, x_max]; constant iff
/// max - min <= tol (1 + |mean|).
inline ScanVerdict constant_curvature_scan(const expr::Ast& f, double x_min, double x_max, std::size_t count, double z,
                                           double tol, const std::map<std::string, double>& params = {}) {
  if (count < 2) throw InvalidArgument("curvature scan needs at least 2 grid points");
  ScanVerdict v;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = x_min + (x_max - x_min) * static_cast<double>(i) / static_cast<double>(count - 1);
    v.x.push_back(x);
    v.k.push_back(curvature_f_deformed(f, x, z, params));
  }
  const auto [mn, mx] = std::minmax_element(v.k.begin(), v.k.end());
  v.k_min = *mn;
  v.k_max = *mx;
  double sum = 0.0;
  for (double k : v.k) sum += k;
  v.k_mean = sum / static_cast<double>(count);
  v.constant = (v.k_max - v.k_min) <= tol * (1.0 + std::abs(v.k_mean));
  return v;
}

// ---------------------------------------------------------------------------
// Geodesic polar chart

enum class PolarKind { type_I, ms };

/// Cayley-Klein cosine and sine: C_k(x) = cos(sqrt(k) x), S_k(x) = sin(sqrt(k) x)/sqrt(k),
/// continued to cosh/sinh for k < 0 and to 1, x at k = 0.
template <class S>
S ck_cos(double k, const S& x) {
  using std::cos;
  using std::cosh;
  if (k > 0.0) return cos(std::sqrt(k) * x);
  if (k < 0.0) return cosh(std::sqrt(-k) * x);
  return S(1.0);
}

template <class S>
S ck_sin(double k, const S& x) {
  using std::sin;
  using std::sinh;
  if (k > 0.0) return sin(std::sqrt(k) * x) / std::sqrt(k);
  if (k < 0.0) return sinh(std::sqrt(-k) * x) / std::sqrt(-k);
  return x;
}

/// Radial coordinate: cosh(sqrt(z) rho) = exp(z (q1^2 + q2^2)); rho = sqrt(2 q^2) at z = 0.
template <class S>
S polar_radius(const S& q1, const S& q2, double z) {
  using std::expm1;
  using std::log1p;
  using std::sqrt;
  if (z < 0.0) throw DomainError("polar chart needs z >= 0 (z q^2 < 0 has no real radius)");
  const S r2 = q1 * q1 + q2 * q2;
  if (z == 0.0) return sqrt(2.0 * r2);
  if (value_of(r2) == 0.0) return S(0.0);
  const S x = z * r2;
  // acosh(e^x) = log(e^x + sqrt(e^{2x} - 1)), written with expm1/log1p for small x
  return log1p(expm1(x) + sqrt(expm1(2.0 * x))) / std::sqrt(z);
}

/// (q1, q2) -> (rho, theta) with sin^2(lambda2 theta) = (e^{2 z q1^2} - 1)/(e^{2 z q^2} - 1).
/// Real lambda2 only; theta is the principal value in [0, pi/(2 lambda2)].
template <class S>
std::array<S, 2> to_polar(const S& q1, const S& q2, double z, double lambda2sq) {
  using std::atan2;
  using std::exp;
  using std::expm1;
  using std::sqrt;
  if (lambda2sq == 0.0) throw InvalidArgument("lambda2^2 must be nonzero");
  if (z < 0.0) throw DomainError("polar chart needs z >= 0 (z q^2 < 0 has no real radius)");
  const S a2 = q1 * q1, b2 = q2 * q2;
  if (value_of(a2) + value_of(b2) == 0.0) throw DomainError("theta is undefined at the origin");
  if (lambda2sq < 0.0 && value_of(a2) != 0.0)
    throw DomainError("imaginary lambda2 needs an imaginary q1; no real branch");
  // sin^2 ~ A, cos^2 ~ B with A + B = e^{2 z q^2} - 1
  S num, den;
  if (z == 0.0) {
    num = a2;
    den = b2;
  } else {
    num = expm1(2.0 * z * a2);
    den = exp(2.0 * z * a2) * expm1(2.0 * z * b2);
  }
  const double l2 = std::sqrt(std::abs(lambda2sq));
  return {polar_radius(q1, q2, z), atan2(sqrt(num), sqrt(den)) / l2};
}

/// Inverse of to_polar on the principal branch q1, q2 >= 0.
template <class S>
std::array<S, 2> from_polar(const S& rho, const S& theta, double z, double lambda2sq) {
  using std::cos;
  using std::expm1;
  using std::log1p;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  if (lambda2sq <= 0.0) throw DomainError("from_polar is defined for real lambda2 only");
  if (z < 0.0) throw DomainError("polar chart needs z >= 0");
  const double l2 = std::sqrt(lambda2sq);
  const S sn = sin(l2 * theta), cs = cos(l2 * theta);
  const S s2 = sn * sn, c2 = cs * cs;
  if (z == 0.0) {
    const S r2 = rho * rho / 2.0;
    return {sqrt(s2 * r2), sqrt(c2 * r2)};
  }
  const S h = sinh(std::sqrt(z) * rho / 2.0);
  const S x = log1p(2.0 * h * h);  // z q^2 = log cosh(sqrt(z) rho)
  const S big = expm1(2.0 * x);
  const S a = s2 * big;
  const S q1sq = log1p(a) / (2.0 * z);
  const S q2sq = log1p(c2 * big / (1.0 + a)) / (2.0 * z);
  return {sqrt(q1sq), sqrt(q2sq)};
}

/// Diagonal metric in geodesic polar coordinates (u = rho or r, v = theta):
///   type_I: (1/C)(drho^2 + lambda2^2 S^2 dtheta^2), C, S Cayley-Klein with k = -lambda1^2
///   ms:     dr^2 + lambda2^2 S^2 dtheta^2,             S Cayley-Klein with k = lambda1^2
inline Metric2D polar_metric(PolarKind kind, double lambda1sq, double lambda2sq) {
  if (lambda2sq == 0.0) throw InvalidArgument("lambda2^2 must be nonzero");
  const bool riemannian = lambda2sq > 0.0;
  if (kind == PolarKind::type_I) {
    return Metric2D(
        [lambda1sq, lambda2sq](const auto& rho, const auto&) {
          using S = std::decay_t<decltype(rho)>;
          const S c = ck_cos(-lambda1sq, rho), s = ck_sin(-lambda1sq, rho);
          return std::array<S, 3>{1.0 / c, S(0.0), lambda2sq * s * s / c};
        },
        MetricConvention::paper_f, riemannian);
  }
  return Metric2D(
      [lambda1sq, lambda2sq](const auto& r, const auto&) {
        using S = std::decay_t<decltype(r)>;
        const S s = ck_sin(lambda1sq, r);
        return std::array<S, 3>{S(1.0), S(0.0), lambda2sq * s * s};
      },
      MetricConvention::paper_f, riemannian);
}

/// Closed-form curvature of the type I polar metric: -(1/2) lambda1^2 sinh^2(lambda1 rho)/cosh(lambda1 rho).
inline double polar_curvature_type_I(double rho, double lambda1sq) {
  const double c = ck_cos(-lambda1sq, rho), s = ck_sin(-lambda1sq, rho);
  return -0.5 * lambda1sq * lambda1sq * s * s / c;
}

/// Jacobian d(rho, theta)/d(q1, q2), rows (rho, theta).
inline Matrix2 polar_jacobian(double q1, double q2, double z, double lambda2sq) {
  const auto c1 = to_polar(D1(q1, 1.0), D1(q2, 0.0), z, lambda2sq);
  const auto c2 = to_polar(D1(q1, 0.0), D1(q2, 1.0), z, lambda2sq);
  return {{{c1[0].d, c2[0].d}, {c1[1].d, c2[1].d}}};
}

/// Pull a metric given in (rho, theta) back to (q1, q2) through to_polar.
inline Matrix2 pullback_polar(const Metric2D& polar, double q1, double q2, double z, double lambda2sq) {
  const auto x = to_polar(q1, q2, z, lambda2sq);
  const Matrix2 g = polar.matrix(x[0], x[1]);
  const Matrix2 j = polar_jacobian(q1, q2, z, lambda2sq);
  Matrix2 out{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double acc = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) acc += j[i][a] * g[i][k] * j[k][b];
      out[a][b] = acc;
    }
  return out;
}

/// Canonical lift of the polar chart: (q, p) -> (rho, theta; P_rho, P_theta) with
/// p = J^T P, J = d(rho, theta)/dq.
inline PhaseState to_polar_canonical(const PhaseState& s, double z, double lambda2sq) {
  if (s.dim() != 2) throw InvalidArgument("polar chart needs N = 2");
  const double q1 = s.q()[0], q2 = s.q()[1];
  const auto x = to_polar(q1, q2, z, lambda2sq);
  const Matrix2 j = polar_jacobian(q1, q2, z, lambda2sq);
  const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
  if (!std::isfinite(det) || det == 0.0) throw SingularPointError("polar chart is singular at this point");
  // Solve J^T P = p
  const double p1 = s.p()[0], p2 = s.p()[1];
  const double prho = (j[1][1] * p1 - j[1][0] * p2) / det;
  const double ptheta = (-j[0][1] * p1 + j[0][0] * p2) / det;
  return PhaseState({x[0], x[1]}, {prho, ptheta});
}

}  // namespace sl2c
