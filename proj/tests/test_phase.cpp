#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sl2c/catalog.hpp"
#include "sl2c/coalgebra.hpp"
#include "sl2c/phase.hpp"

using namespace sl2c;

namespace {

Observable raw(const std::string& src, std::size_t n) { return compile_raw(expr::parse(src), n); }

const PhaseState kState({1.0, 2.0}, {0.5, -1.0});

}  // namespace

TEST(PhaseState, Validation) {
  EXPECT_THROW(PhaseState({}, {}), InvalidArgument);
  EXPECT_THROW(PhaseState({1.0}, {1.0, 2.0}), InvalidArgument);
  EXPECT_THROW(PhaseState({NAN}, {1.0}), InvalidArgument);
  EXPECT_THROW(PhaseState({INFINITY}, {1.0}), InvalidArgument);
}

TEST(Evaluate, RawAndGenerators) {
  EXPECT_EQ(evaluate(raw("q1*p1", 1), PhaseState({2.0}, {3.0})), 6.0);
  const auto g = make_generators(Realization::classical(2));
  EXPECT_EQ(evaluate(g.jm, kState), 5.0);
  EXPECT_EQ(evaluate(g.jp, kState), 1.25);
  EXPECT_EQ(evaluate(g.j3, kState), -1.5);
}

TEST(Evaluate, SingularPointNamesCoordinate) {
  const auto g = make_generators(Realization::classical(2, {0.0, 1.0}));
  try {
    evaluate(g.jp, PhaseState({1.0, 0.0}, {1.0, 1.0}));
    FAIL();
  } catch (const SingularPointError& e) {
    EXPECT_NE(std::string(e.what()).find("q2"), std::string::npos) << e.what();
  }
}

TEST(Gradient, HandExamples) {
  const auto g1 = gradient(raw("q1^2", 1), PhaseState({3.0}, {0.0}));
  EXPECT_EQ(g1.dq[0], 6.0);
  EXPECT_EQ(g1.dp[0], 0.0);
  const auto g = gradient(make_generators(Realization::classical(2)).j3, kState);
  EXPECT_EQ(g.dq, (std::vector<double>{0.5, -1.0}));
  EXPECT_EQ(g.dp, (std::vector<double>{1.0, 2.0}));
}

TEST(Gradient, MatchesFiniteDifferencesOnCatalog) {
  const std::vector<SystemSpec> specs{
      build("euclidean", {}, Realization::classical(2)),
      build("poincare", {{"kappa", -0.3}}, Realization::classical(2)),
      build("beltrami", {{"kappa", 0.2}}, Realization::classical(2)),
      build("f_family", {}, Realization::classical(2), {{"f", "1/(1+x)"}}),
      build("darboux3", {{"alpha", 1.0}}, Realization::classical(2)),
      build("j3sq", {{"alpha", 0.4}}, Realization::classical(3)),
      build("j3sq_jm", {{"alpha", 0.4}}, Realization::classical(2)),
      build("potential", {{"w", 0.5}}, Realization::classical(3, {0.3, 0.1, 0.2}), {{"T", "Jp/2"}, {"V", "w*x"}}),
      build("z_f_family", {}, Realization::deformed(2, 0.3), {{"f", "cosh(x)"}}),
      build("z_type_I", {}, Realization::deformed(3, 0.25, {0.1, 0.2, 0.3})),
      build("z_ms", {{"sign", -1.0}}, Realization::deformed(2, 0.4)),
      build("z_j3sq", {{"alpha", 0.3}}, Realization::deformed(2, -0.2)),
      build("z_potential", {}, Realization::deformed(2, 0.5), {{"f", "exp(x)"}, {"U", "x^2"}}),
  };
  StateSampler sampler(5);
  for (const auto& spec : specs) {
    for (int k = 0; k < 20; ++k) {
      const PhaseState s = sampler.next(spec.realization.n, 0.3, 1.2, 1.2);
      const auto g = gradient(spec.hamiltonian, s);
      const auto f = oracle::fd_gradient(spec.hamiltonian, s);
      for (std::size_t i = 0; i < s.dim(); ++i) {
        EXPECT_NEAR(g.dq[i], f.dq[i], 1e-6 * (1 + std::abs(f.dq[i]))) << spec.name;
        EXPECT_NEAR(g.dp[i], f.dp[i], 1e-6 * (1 + std::abs(f.dp[i]))) << spec.name;
      }
    }
  }
}

TEST(Hessian, Examples) {
  const auto h = hessian_pp(raw("p1^2/2 + p2^2/2", 2), PhaseState({0.3, 0.4}, {1.0, 2.0}));
  EXPECT_EQ(h, (std::vector<std::vector<double>>{{1, 0}, {0, 1}}));
  const auto b = build("beltrami", {{"kappa", 0.7}}, Realization::classical(2));
  EXPECT_EQ(hessian_pp(b.hamiltonian, PhaseState({0.0, 0.0}, {0.3, 0.1})),
            (std::vector<std::vector<double>>{{1, 0}, {0, 1}}));
  const auto j = build("j3sq", {{"alpha", 1.0}}, Realization::classical(2));
  const auto hj = hessian_pp(j.hamiltonian, PhaseState({1.0, 0.0}, {0.7, -2.0}));
  EXPECT_EQ(hj, (std::vector<std::vector<double>>{{3, 0}, {0, 1}}));
}

TEST(Bracket, Examples) {
  EXPECT_EQ(poisson_bracket(coordinate_q(1, 0), momentum_p(1, 0), PhaseState({0.4}, {2.0})), 1.0);
  const auto g = make_generators(Realization::classical(2));
  EXPECT_DOUBLE_EQ(poisson_bracket(g.j3, g.jp, kState), 2.5);
  EXPECT_NEAR(oracle::fd_bracket(g.j3, g.jp, kState), 2.5, 1e-8);
  EXPECT_EQ(poisson_bracket(g.jp, g.jp, kState), 0.0);
}

TEST(Bracket, Antisymmetry) {
  StateSampler sampler(3);
  const auto g = make_generators(Realization::deformed(3, 0.4, {0.2, 0.0, 1.0}));
  const std::vector<Observable> obs{g.jm, g.jp, g.j3, raw("q1*p2^3 + sinh(q3)", 3)};
  for (int k = 0; k < 100; ++k) {
    const auto s = sampler.next(3);
    for (const auto& f : obs)
      for (const auto& h : obs) {
        const double a = poisson_bracket(f, h, s), b = poisson_bracket(h, f, s);
        EXPECT_LE(std::abs(a + b), 1e-14 * (1 + std::abs(a)));
      }
  }
}

TEST(Bracket, Leibniz) {
  StateSampler sampler(17);
  const std::vector<std::string> srcs{"q1*p2 + q2^2", "exp(p1/3)*q2", "sinh(q1*q2) - p2", "q1^2*p1 + 1"};
  for (int k = 0; k < 100; ++k) {
    const auto s = sampler.next(2);
    const auto f = raw(srcs[k % 4], 2), g = raw(srcs[(k + 1) % 4], 2), h = raw(srcs[(k + 2) % 4], 2);
    const double lhs = poisson_bracket(f, g * h, s);
    const double rhs = evaluate(g, s) * poisson_bracket(f, h, s) + evaluate(h, s) * poisson_bracket(f, g, s);
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * (1 + std::max(std::abs(lhs), std::abs(rhs))));
  }
}

TEST(Bracket, JacobiOnGenerators) {
  for (const auto& r : {Realization::classical(3, {0.5, 0.0, 1.5}), Realization::deformed(3, 0.6, {0.5, 0.0, 1.5})}) {
    const auto g = make_generators(r);
    StateSampler sampler(23);
    for (int k = 0; k < 100; ++k) {
      const auto s = sampler.next(3);
      const double a = poisson_bracket(g.jm, bracket(g.jp, g.j3), s);
      const double b = poisson_bracket(g.jp, bracket(g.j3, g.jm), s);
      const double c = poisson_bracket(g.j3, bracket(g.jm, g.jp), s);
      const double scale = 1 + std::max({std::abs(a), std::abs(b), std::abs(c)});
      EXPECT_LE(std::abs(a + b + c), 1e-9 * scale) << to_string(r.kind);
    }
  }
}

TEST(Bracket, NestedBracketMatchesClosedForm) {
  const auto g = make_generators(Realization::classical(2));
  const auto br = bracket(g.j3, g.jp);
  EXPECT_DOUBLE_EQ(evaluate(br, kState), 2.5);
  const auto grad = gradient(br, kState);
  const auto ref = gradient(2.0 * g.jp, kState);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(grad.dq[i], ref.dq[i]);
    EXPECT_DOUBLE_EQ(grad.dp[i], ref.dp[i]);
  }
}

TEST(Gradient, ExtendedAgreesWithDouble) {
  const auto h = build("z_ms", {{"sign", 1.0}}, Realization::deformed(3, 0.7, {0.4, 0.0, 1.3})).hamiltonian;
  StateSampler sampler(12);
  for (int k = 0; k < 20; ++k) {
    const auto s = sampler.next(3);
    const auto g = gradient(h, s);
    const auto e = extended_gradient(h, s);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(static_cast<double>(e.dq[i]), g.dq[i], 1e-14 * (1 + std::abs(g.dq[i])));
      EXPECT_NEAR(static_cast<double>(e.dp[i]), g.dp[i], 1e-14 * (1 + std::abs(g.dp[i])));
    }
  }
}

TEST(Bracket, ExtendedPrecisionResolvesLargeCancellation) {
  const std::vector<double> b{1.26, 0.91, 1.96};
  const auto r = Realization::deformed(3, 1.0, b);
  const auto h = build("z_ms", {{"sign", 1.0}}, r).hamiltonian;
  const auto c = casimir(r);
  const PhaseState s({-1.5988880931002314, 1.8358024358774443, 1.7594377147146076},
                     {-0.35840240288958514, -0.33734678347195146, 0.51247227306909782});
  const double br = poisson_bracket(h, c, s);
  const double scale = 1 + std::max(std::abs(evaluate(h, s)), std::abs(evaluate(c, s)));
  EXPECT_LE(std::abs(br) / scale, 1e-11);
}

TEST(Bracket, ObservableSupportsExtendedKind) {
  const auto g = make_generators(Realization::classical(2));
  const auto br = bracket(g.j3, g.jp);
  const auto e = extended_gradient(br, kState);
  const auto d = gradient(br, kState);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(static_cast<double>(e.dq[i]), d.dq[i]);
    EXPECT_EQ(static_cast<double>(e.dp[i]), d.dp[i]);
  }
}
