#include <gtest/gtest.h>

#include <cmath>

#include "sl2c/scalar.hpp"

using namespace sl2c;

TEST(Dual, ProductAndQuotientRules) {
  const D1 x(3.0, 1.0);
  const D1 y = x * x / (1.0 + x);
  // d/dx x^2/(1+x) = (2x(1+x) - x^2)/(1+x)^2 = (x^2 + 2x)/(1+x)^2
  EXPECT_DOUBLE_EQ(y.v, 9.0 / 4.0);
  EXPECT_DOUBLE_EQ(y.d, 15.0 / 16.0);
}

TEST(Dual, ElementaryFunctionsMatchFiniteDifferences) {
  const double x0 = 0.37, h = 1e-6;
  const auto check = [&](auto f, auto fd) {
    const D1 r = f(D1(x0, 1.0));
    const double ref = (fd(x0 + h) - fd(x0 - h)) / (2 * h);
    EXPECT_NEAR(r.d, ref, 1e-6 * (1 + std::abs(ref)));
    EXPECT_EQ(r.v, fd(x0));
  };
  check([](D1 x) { return exp(x); }, [](double x) { return std::exp(x); });
  check([](D1 x) { return log(x); }, [](double x) { return std::log(x); });
  check([](D1 x) { return sqrt(x); }, [](double x) { return std::sqrt(x); });
  check([](D1 x) { return sinh(x); }, [](double x) { return std::sinh(x); });
  check([](D1 x) { return cosh(x); }, [](double x) { return std::cosh(x); });
  check([](D1 x) { return tanh(x); }, [](double x) { return std::tanh(x); });
  check([](D1 x) { return sin(x); }, [](double x) { return std::sin(x); });
  check([](D1 x) { return cos(x); }, [](double x) { return std::cos(x); });
  check([](D1 x) { return expm1(x); }, [](double x) { return std::expm1(x); });
  check([](D1 x) { return log1p(x); }, [](double x) { return std::log1p(x); });
  check([](D1 x) { return atan2(x, D1(0.8)); }, [](double x) { return std::atan2(x, 0.8); });
  check([](D1 x) { return pow(x, 2.5); }, [](double x) { return std::pow(x, 2.5); });
  check([](D1 x) { return pow(D1(1.7), x); }, [](double x) { return std::pow(1.7, x); });
}

TEST(Dual, HyperDualGivesSecondDerivative) {
  // f = x^3 e^x, f'' = (x^3 + 6x^2 + 6x) e^x
  const double x0 = 0.6;
  const D2 x(D1(x0, 1.0), D1(1.0, 0.0));
  const D2 f = x * x * x * exp(x);
  EXPECT_NEAR(f.d.d, (x0 * x0 * x0 + 6 * x0 * x0 + 6 * x0) * std::exp(x0), 1e-13);
  EXPECT_DOUBLE_EQ(f.v.d, f.d.v);
}

TEST(Dual, ThirdOrderTower) {
  // d^3/dx^3 sinh(2x) = 8 cosh(2x)
  const double x0 = 0.3;
  D3 x(x0);
  x.v.v.d = 1.0;
  x.v.d.v = 1.0;
  x.d.v.v = 1.0;
  const D3 f = sinh(2.0 * x);
  EXPECT_NEAR(f.d.d.d, 8 * std::cosh(2 * x0), 1e-13);
}

TEST(Dual, PowWithZeroExponentIsOne) {
  const D1 x(0.0, 1.0);
  EXPECT_EQ(pow(x, D1(0.0)).v, 1.0);
  EXPECT_EQ(pow(x, D1(0.0)).d, 0.0);
  const D1 sq = pow(x, D1(2.0));
  EXPECT_EQ(sq.v, 0.0);
  EXPECT_EQ(sq.d, 0.0);
}

TEST(Sinhc, RemovableSingularity) {
  EXPECT_EQ(sinhc(0.0), 1.0);
  const D2 x(D1(0.0, 1.0), D1(1.0, 0.0));
  const D2 s = sinhc(x);
  EXPECT_EQ(s.v.v, 1.0);
  EXPECT_EQ(s.v.d, 0.0);
  EXPECT_NEAR(s.d.d, 1.0 / 3.0, 1e-15);  // sinhc'' (0) = 2/6
}

TEST(Sinhc, MatchesSinhOverXOnWideRange) {
  for (int k = -1000; k <= 1000; ++k) {
    const double x = k * 0.01 + 1e-3 * ((k % 7) - 3) * 1e-3;
    if (x == 0.0) continue;
    const double ref = std::sinh(x) / x;
    EXPECT_LE(std::abs(sinhc(x) - ref), 1e-15 * std::cosh(x)) << "x=" << x;
  }
}

TEST(Sinhc, ContinuousAcrossSeriesSwitch) {
  const double a = std::nextafter(1e-2, 0.0), b = 1e-2;
  EXPECT_NEAR(sinhc(a), sinhc(b), 1e-15);
  EXPECT_NEAR(sinhc(a), std::sinh(a) / a, 1e-15);
}
