#pragma once

// Forward-mode dual numbers. Nesting Dual<Dual<double>> gives the hyper-dual
// number (eps1, eps2, eps1*eps2) used for exact second derivatives; a third
// level is used to probe third derivatives.

#include <cmath>
#include <ostream>
#include <type_traits>

namespace sl2c {

template <class T>
struct Dual {
  T v{};  // value part
  T d{};  // derivative part

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value), d(0.0) {}  // NOLINT: implicit lift of constants
  constexpr Dual(T value, T deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
  Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }
};

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;
using LD1 = Dual<long double>;  // first derivatives in extended precision

template <class S> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};

/// Real part of any member of the tower.
inline constexpr double value_of(double x) { return x; }
inline constexpr double value_of(long double x) { return static_cast<double>(x); }
template <class T>
constexpr double value_of(const Dual<T>& x) { return value_of(x.v); }

inline constexpr bool is_zero(double x) { return x == 0.0; }
inline constexpr bool is_zero(long double x) { return x == 0.0L; }
template <class T>
constexpr bool is_zero(const Dual<T>& x) { return is_zero(x.v) && is_zero(x.d); }

/// True when every derivative channel is exactly zero.
inline constexpr bool is_constant(double) { return true; }
inline constexpr bool is_constant(long double) { return true; }
template <class T>
constexpr bool is_constant(const Dual<T>& x) {
  return is_constant(x.v) && is_zero(x.d);
}

template <class T> constexpr Dual<T> operator+(const Dual<T>& a) { return a; }
template <class T> constexpr Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }

template <class T>
constexpr Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T>
constexpr Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T>
constexpr Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class T>
constexpr Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  const T r = a.v / b.v;
  return {r, (a.d - r * b.d) / b.v};
}

template <class T> constexpr Dual<T> operator+(const Dual<T>& a, double b) { return {a.v + b, a.d}; }
template <class T> constexpr Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.v, b.d}; }
template <class T> constexpr Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <class T> constexpr Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.v, -b.d}; }
template <class T> constexpr Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <class T> constexpr Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.v, a * b.d}; }
template <class T> constexpr Dual<T> operator/(const Dual<T>& a, double b) { return {a.v / b, a.d / b}; }
template <class T> constexpr Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

template <class T>
std::ostream& operator<<(std::ostream& os, const Dual<T>& x) {
  return os << '(' << x.v << " + " << x.d << " eps)";
}

// Elementary functions. Each one is the chain rule applied to the next level
// down; the value part always goes through the same std:: call as the plain
// double overload so that real and dual evaluations agree bit-for-bit.

template <class T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  const T e = exp(a.v);
  return {e, e * a.d};
}

template <class T>
Dual<T> log(const Dual<T>& a) {
  using std::log;
  return {log(a.v), a.d / a.v};
}

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  const T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}

template <class T>
Dual<T> sinh(const Dual<T>& a) {
  using std::cosh;
  using std::sinh;
  return {sinh(a.v), cosh(a.v) * a.d};
}

template <class T>
Dual<T> cosh(const Dual<T>& a) {
  using std::cosh;
  using std::sinh;
  return {cosh(a.v), sinh(a.v) * a.d};
}

template <class T>
Dual<T> tanh(const Dual<T>& a) {
  using std::tanh;
  const T t = tanh(a.v);
  return {t, (1.0 - t * t) * a.d};
}

template <class T>
Dual<T> sin(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {sin(a.v), cos(a.v) * a.d};
}

template <class T>
Dual<T> cos(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {cos(a.v), -sin(a.v) * a.d};
}

template <class T>
Dual<T> asin(const Dual<T>& a) {
  using std::asin;
  using std::sqrt;
  return {asin(a.v), a.d / sqrt(1.0 - a.v * a.v)};
}

template <class T>
Dual<T> acos(const Dual<T>& a) {
  using std::acos;
  using std::sqrt;
  return {acos(a.v), -a.d / sqrt(1.0 - a.v * a.v)};
}

template <class T>
Dual<T> acosh(const Dual<T>& a) {
  using std::acosh;
  using std::sqrt;
  return {acosh(a.v), a.d / sqrt(a.v * a.v - 1.0)};
}

template <class T>
Dual<T> expm1(const Dual<T>& a) {
  using std::exp;
  using std::expm1;
  return {expm1(a.v), exp(a.v) * a.d};
}

template <class T>
Dual<T> log1p(const Dual<T>& a) {
  using std::log1p;
  return {log1p(a.v), a.d / (1.0 + a.v)};
}

template <class T>
Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
  using std::atan2;
  return {atan2(y.v, x.v), (x.v * y.d - y.v * x.d) / (x.v * x.v + y.v * y.v)};
}

/// a^b. The log term is dropped when b carries no derivative so that negative
/// bases with integral exponents stay finite.
inline double pow(double a, double b) { return std::pow(a, b); }
inline long double pow(long double a, long double b) { return std::pow(a, b); }

template <class T>
Dual<T> pow(const Dual<T>& a, const Dual<T>& b) {
  using std::log;
  if (is_constant(b) && value_of(b) == 0.0) return Dual<T>(1.0);
  const T val = pow(a.v, b.v);
  T d = b.v * pow(a.v, b.v - 1.0) * a.d;
  if (!is_zero(b.d)) d += val * log(a.v) * b.d;
  return {val, d};
}

template <class T>
Dual<T> pow(const Dual<T>& a, double b) {
  return pow(a, Dual<T>(b));
}

/// sinh(x)/x with the removable singularity at 0 filled in. A short Taylor
/// polynomial is used for |x| < 1e-2; its truncation error there is below
/// 2e-20, and because it is plain arithmetic it differentiates exactly.
template <class S>
S sinhc(const S& x) {
  using std::abs;
  using std::sinh;
  if (abs(value_of(x)) < 1e-2) {
    const S x2 = x * x;
    return 1.0 + x2 * (1.0 / 6.0 + x2 * (1.0 / 120.0 + x2 * (1.0 / 5040.0)));
  }
  return sinh(x) / x;
}

}  // namespace sl2c
