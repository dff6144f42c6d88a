#pragma once

// Phase-space functions and their exact derivatives.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "sl2c/errors.hpp"
#include "sl2c/scalar.hpp"

namespace sl2c {

/// N canonical pairs (q_i, p_i).
class PhaseState {
 public:
  PhaseState() = default;
  PhaseState(std::vector<double> q, std::vector<double> p) : q_(std::move(q)), p_(std::move(p)) {
    if (q_.empty() || q_.size() != p_.size())
      throw InvalidArgument("phase state needs q and p of equal length N >= 1 (got " +
                            std::to_string(q_.size()) + " and " + std::to_string(p_.size()) + ")");
    for (std::size_t i = 0; i < q_.size(); ++i)
      if (!std::isfinite(q_[i]) || !std::isfinite(p_[i]))
        throw InvalidArgument("phase state entries must be finite (pair " + std::to_string(i + 1) + ")");
  }

  std::size_t dim() const noexcept { return q_.size(); }
  const std::vector<double>& q() const noexcept { return q_; }
  const std::vector<double>& p() const noexcept { return p_; }

 private:
  std::vector<double> q_;
  std::vector<double> p_;
};

template <class S>
using PhaseFunction = std::function<S(std::span<const S>, std::span<const S>)>;

/// A smooth function on the 2N-dimensional phase space, evaluable with every
/// scalar kind of the tower. Cheap to copy; immutable.
class Observable {
 public:
  Observable() = default;

  /// `f` must be callable as f(std::span<const S> q, std::span<const S> p) -> S
  /// for S in {double, D1, D2, D3, LD1}. `nonzero_q` lists the (0-based) positions
  /// that must not vanish for the function to be defined.
  template <class F>
  Observable(std::string name, std::size_t dim, F f, std::vector<std::size_t> nonzero_q = {})
      : impl_(std::make_shared<const Impl>(Impl{std::move(name), dim, std::move(nonzero_q),
                                                {PhaseFunction<double>(f), PhaseFunction<D1>(f),
                                                 PhaseFunction<D2>(f), PhaseFunction<D3>(f),
                                                 PhaseFunction<LD1>(f)}})) {}

  const std::string& name() const { return impl_->name; }
  std::size_t dim() const { return impl_->dim; }
  const std::vector<std::size_t>& nonzero_q() const { return impl_->nonzero_q; }
  explicit operator bool() const noexcept { return impl_ != nullptr; }

  template <class S>
  S operator()(std::span<const S> q, std::span<const S> p) const {
    return std::get<PhaseFunction<S>>(impl_->fns)(q, p);
  }

  /// Throws SingularPointError naming the first coordinate that sits on the
  /// singular set.
  void check_domain(std::span<const double> q) const {
    if (q.size() != dim())
      throw InvalidArgument("observable '" + name() + "' expects N=" + std::to_string(dim()) +
                            ", state has N=" + std::to_string(q.size()));
    for (auto i : impl_->nonzero_q)
      if (q[i] == 0.0)
        throw SingularPointError("'" + name() + "' is singular at q" + std::to_string(i + 1) + " = 0");
  }

  Observable renamed(std::string name) const {
    auto copy = *impl_;
    copy.name = std::move(name);
    Observable o;
    o.impl_ = std::make_shared<const Impl>(std::move(copy));
    return o;
  }

 private:
  struct Impl {
    std::string name;
    std::size_t dim;
    std::vector<std::size_t> nonzero_q;
    std::tuple<PhaseFunction<double>, PhaseFunction<D1>, PhaseFunction<D2>, PhaseFunction<D3>, PhaseFunction<LD1>>
        fns;
  };
  std::shared_ptr<const Impl> impl_;
};

namespace detail {

inline std::vector<std::size_t> merge_nonzero(const Observable& a, const Observable& b) {
  auto out = a.nonzero_q();
  for (auto i : b.nonzero_q())
    if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  return out;
}

inline std::size_t common_dim(const Observable& a, const Observable& b) {
  if (a.dim() != b.dim())
    throw InvalidArgument("observables '" + a.name() + "' and '" + b.name() + "' have different dimensions");
  return a.dim();
}

}  // namespace detail

inline Observable operator+(const Observable& a, const Observable& b) {
  return {"(" + a.name() + " + " + b.name() + ")", detail::common_dim(a, b),
          [a, b](auto q, auto p) { return a(q, p) + b(q, p); }, detail::merge_nonzero(a, b)};
}
inline Observable operator-(const Observable& a, const Observable& b) {
  return {"(" + a.name() + " - " + b.name() + ")", detail::common_dim(a, b),
          [a, b](auto q, auto p) { return a(q, p) - b(q, p); }, detail::merge_nonzero(a, b)};
}
inline Observable operator*(const Observable& a, const Observable& b) {
  return {"(" + a.name() + " * " + b.name() + ")", detail::common_dim(a, b),
          [a, b](auto q, auto p) { return a(q, p) * b(q, p); }, detail::merge_nonzero(a, b)};
}
inline Observable operator*(double c, const Observable& a) {
  return {"(" + std::to_string(c) + " * " + a.name() + ")", a.dim(),
          [c, a](auto q, auto p) { return c * a(q, p); }, a.nonzero_q()};
}

/// Coordinate function q_i (0-based index).
inline Observable coordinate_q(std::size_t n, std::size_t i) {
  return {"q" + std::to_string(i + 1), n, [i](auto q, auto) { return q[i]; }};
}
/// Momentum function p_i (0-based index).
inline Observable momentum_p(std::size_t n, std::size_t i) {
  return {"p" + std::to_string(i + 1), n, [i](auto, auto p) { return p[i]; }};
}

inline double evaluate(const Observable& obs, const PhaseState& s) {
  obs.check_domain(s.q());
  const double v = obs(std::span<const double>(s.q()), std::span<const double>(s.p()));
  if (!std::isfinite(v)) throw SingularPointError("'" + obs.name() + "' is not finite at this state");
  return v;
}

template <class T>
struct BasicGradient {
  std::vector<T> dq;
  std::vector<T> dp;
};
using Gradient = BasicGradient<double>;
using ExtendedGradient = BasicGradient<long double>;

namespace detail {

template <class D>
BasicGradient<decltype(D::d)> gradient_with(const Observable& obs, const PhaseState& s) {
  using T = decltype(D::d);
  obs.check_domain(s.q());
  const std::size_t n = s.dim();
  std::vector<D> q, p;
  for (double x : s.q()) q.emplace_back(T(x), T(0));
  for (double x : s.p()) p.emplace_back(T(x), T(0));
  BasicGradient<T> g{std::vector<T>(n), std::vector<T>(n)};
  const auto pass = [&](D& seed) {
    seed.d = T(1);
    const D r = obs(std::span<const D>(q), std::span<const D>(p));
    seed.d = T(0);
    if (!std::isfinite(r.d)) throw SingularPointError("derivative of '" + obs.name() + "' is not finite");
    return r.d;
  };
  for (std::size_t i = 0; i < n; ++i) g.dq[i] = pass(q[i]);
  for (std::size_t i = 0; i < n; ++i) g.dp[i] = pass(p[i]);
  return g;
}

}  // namespace detail

/// Exact partial derivatives by 2N forward-mode passes.
inline Gradient gradient(const Observable& obs, const PhaseState& s) { return detail::gradient_with<D1>(obs, s); }

/// The same in long double, for bracket checks whose terms cancel heavily.
inline ExtendedGradient extended_gradient(const Observable& obs, const PhaseState& s) {
  return detail::gradient_with<LD1>(obs, s);
}

/// Symmetric matrix of second momentum derivatives, one hyper-dual pass per
/// upper-triangle entry.
inline std::vector<std::vector<double>> hessian_pp(const Observable& obs, const PhaseState& s) {
  obs.check_domain(s.q());
  const std::size_t n = s.dim();
  std::vector<D2> q, p;
  for (double x : s.q()) q.emplace_back(x);
  for (double x : s.p()) p.emplace_back(x);
  std::vector<std::vector<double>> h(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      p[i].v.d += 1.0;
      p[j].d.v += 1.0;
      const D2 r = obs(std::span<const D2>(q), std::span<const D2>(p));
      p[i].v.d = 0.0;
      p[j].d.v = 0.0;
      h[i][j] = h[j][i] = r.d.d;
    }
  }
  return h;
}

/// Canonical bracket sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i). Written so that
/// {g,f} is the exact negation of {f,g}.
template <class T>
T poisson_bracket(const BasicGradient<T>& f, const BasicGradient<T>& g) {
  T acc(0);
  for (std::size_t i = 0; i < f.dq.size(); ++i) acc += f.dq[i] * g.dp[i] - f.dp[i] * g.dq[i];
  return acc;
}

/// Evaluated in extended precision and rounded once.
inline double poisson_bracket(const Observable& f, const Observable& g, const PhaseState& s) {
  return static_cast<double>(poisson_bracket(extended_gradient(f, s), extended_gradient(g, s)));
}

/// {f, g} as an observable, so brackets can be nested. Its own derivatives
/// are exact up to second order; third-order evaluation throws.
inline Observable bracket(const Observable& f, const Observable& g) {
  return {"{" + f.name() + "," + g.name() + "}", detail::common_dim(f, g),
          [f, g](auto q, auto p) {
            using S = typename decltype(q)::value_type;
            if constexpr (std::is_same_v<S, D3>) {
              throw InvalidArgument("derivatives of a bracket are available up to second order");
              return S(0.0);
            } else if constexpr (std::is_same_v<S, LD1>) {
              std::vector<D1> qd, pd;
              for (const auto& x : q) qd.emplace_back(static_cast<double>(x.v), static_cast<double>(x.d));
              for (const auto& x : p) pd.emplace_back(static_cast<double>(x.v), static_cast<double>(x.d));
              const auto b = bracket(f, g)(std::span<const D1>(qd), std::span<const D1>(pd));
              return S(b.v, b.d);
            } else {
              using T = Dual<S>;
              std::vector<T> qq, pp;
              for (const auto& x : q) qq.emplace_back(x, S(0.0));
              for (const auto& x : p) pp.emplace_back(x, S(0.0));
              const auto d = [&](const Observable& o) {
                return o(std::span<const T>(qq), std::span<const T>(pp)).d;
              };
              S acc(0.0);
              for (std::size_t i = 0; i < q.size(); ++i) {
                qq[i].d = S(1.0);
                const S fq = d(f), gq = d(g);
                qq[i].d = S(0.0);
                pp[i].d = S(1.0);
                const S fp = d(f), gp = d(g);
                pp[i].d = S(0.0);
                acc += fq * gp - fp * gq;
              }
              return acc;
            }
          },
          detail::merge_nonzero(f, g)};
}

/// Reproducible random phase points: q_i uniform on [-2,-0.2] U [0.2,2]
/// (away from the q_i = 0 singular set), p_i uniform on [-2,2].
class StateSampler {
 public:
  explicit StateSampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  PhaseState next(std::size_t n, double q_min = 0.2, double q_max = 2.0, double p_max = 2.0) {
    std::vector<double> q(n), p(n);
    for (auto& x : q) {
      const double mag = uniform(q_min, q_max);
      x = (rng_() >> 63) ? -mag : mag;
    }
    for (auto& x : p) x = uniform(-p_max, p_max);
    return {std::move(q), std::move(p)};
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace sl2c
