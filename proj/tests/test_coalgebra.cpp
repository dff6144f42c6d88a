#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sl2c/coalgebra.hpp"

using namespace sl2c;

namespace {

const PhaseState kState({1.0, 2.0}, {0.5, -1.0});

std::vector<double> random_b(std::size_t n, std::uint64_t seed) {
  StateSampler s(seed);
  std::vector<double> b(n);
  for (auto& x : b) x = s.uniform(0.0, 2.0);
  return b;
}

}  // namespace

TEST(Generators, ClassicalValues) {
  const auto g = make_generators(Realization::classical(2));
  EXPECT_EQ(evaluate(g.jm, kState), 5.0);
  EXPECT_EQ(evaluate(g.j3, kState), -1.5);
  EXPECT_EQ(evaluate(g.jp, kState), 1.25);
}

TEST(Generators, ClassicalMatchesTranscription) {
  StateSampler sampler(1);
  const std::vector<double> b{0.3, 1.1, 0.0};
  const auto g = make_generators(Realization::classical(3, b));
  for (int k = 0; k < 50; ++k) {
    const auto s = sampler.next(3);
    const auto ref = oracle::classical(s.q(), s.p(), b);
    EXPECT_DOUBLE_EQ(evaluate(g.jm, s), ref.jm);
    EXPECT_DOUBLE_EQ(evaluate(g.jp, s), ref.jp);
    EXPECT_DOUBLE_EQ(evaluate(g.j3, s), ref.j3);
  }
}

TEST(Generators, DeformedAtZeroIsBitIdenticalToClassical) {
  StateSampler sampler(2);
  for (std::size_t n : {1u, 2u, 4u}) {
    const auto b = random_b(n, n);
    const auto c = make_generators(Realization::classical(n, b));
    const auto d = make_generators(Realization::deformed(n, 0.0, b));
    const auto cc = casimir(Realization::classical(n, b)), dc = casimir(Realization::deformed(n, 0.0, b));
    for (int k = 0; k < 50; ++k) {
      const auto s = sampler.next(n);
      EXPECT_EQ(evaluate(c.jm, s), evaluate(d.jm, s));
      EXPECT_EQ(evaluate(c.jp, s), evaluate(d.jp, s));
      EXPECT_EQ(evaluate(c.j3, s), evaluate(d.j3, s));
      EXPECT_EQ(evaluate(cc, s), evaluate(dc, s));
    }
  }
}

TEST(Generators, DeformedFrozenValue) {
  // sinhc(0.3) e^{0.3} with q = (1,1), p = (1,0)
  const PhaseState s({1.0, 1.0}, {1.0, 0.0});
  const auto g = make_generators(Realization::deformed(2, 0.3));
  EXPECT_NEAR(evaluate(g.j3, s), 1.3701980006508482747, 1e-15);
  EXPECT_NEAR(evaluate(g.jp, s), 1.3701980006508482747, 1e-15);
  EXPECT_NEAR(evaluate(g.j3, s), std::sinh(0.3) / 0.3 * std::exp(0.3), 1e-15);
}

TEST(Generators, DeformedMatchesTwoSiteTranscription) {
  StateSampler sampler(4);
  for (double z : {0.3, -0.7, 1.0}) {
    const auto g = make_generators(Realization::deformed(2, z, {0.4, 1.3}));
    for (int k = 0; k < 50; ++k) {
      const auto s = sampler.next(2);
      const auto ref = oracle::deformed2(z, s.q()[0], s.q()[1], s.p()[0], s.p()[1], 0.4, 1.3);
      EXPECT_NEAR(evaluate(g.jp, s), ref.jp, 1e-13 * (1 + std::abs(ref.jp)));
      EXPECT_NEAR(evaluate(g.j3, s), ref.j3, 1e-13 * (1 + std::abs(ref.j3)));
    }
  }
}

TEST(Generators, ContinuityInZ) {
  StateSampler sampler(5);
  const auto b = random_b(3, 9);
  const auto c = make_generators(Realization::classical(3, b));
  const auto d = make_generators(Realization::deformed(3, 1e-6, b));
  for (int k = 0; k < 50; ++k) {
    const auto s = sampler.next(3);
    for (auto [x, y] : {std::pair{c.jp, d.jp}, std::pair{c.j3, d.j3}}) {
      const double u = evaluate(x, s), v = evaluate(y, s);
      EXPECT_LE(std::abs(u - v), 1e-4 * (1 + std::max(std::abs(u), std::abs(v))));
    }
  }
}

TEST(Casimir, ClassicalExamples) {
  const auto c = casimir(Realization::classical(2));
  EXPECT_EQ(evaluate(c, kState), 4.0);
  EXPECT_EQ(evaluate(c, PhaseState({0.4, -1.2}, {0.0, 0.0})), 0.0);
}

TEST(Casimir, DeformedFrozenValue) {
  const PhaseState s({1.0, 1.0}, {1.0, 0.0});
  const double c = evaluate(casimir(Realization::deformed(2, 0.3)), s);
  EXPECT_NEAR(c, 1.0303623235681539097, 1e-14);
  EXPECT_NEAR(c, oracle::deformed2_casimir(0.3, 1, 1, 1, 0), 1e-14);
}

TEST(Casimir, PairwiseFormMatchesGeneratorForm) {
  StateSampler sampler(19);
  for (std::size_t n = 1; n <= 5; ++n)
    for (const double z : {0.0, 0.35, -0.7})
      for (const auto order : {SiteOrder::ascending, SiteOrder::descending}) {
        std::vector<double> b(n);
        for (std::size_t i = 0; i < n; ++i) b[i] = 0.1 * static_cast<double>(i);
        const Realization r = z == 0.0 ? Realization::classical(n, b) : Realization::deformed(n, z, b);
        const auto c = casimir(r, {}, order);
        for (int k = 0; k < 30; ++k) {
          const auto s = sampler.next(n, 0.3, 1.2, 1.2);
          const double a = evaluate(c, s);
          const double g = casimir_value(r, generator_values<double>(r, s.q(), s.p(), {}, order));
          EXPECT_LE(std::abs(a - g), 1e-11 * (1 + std::abs(g))) << "n=" << n << " z=" << z;
        }
      }
}

TEST(Casimir, DeformedAtZeroIsBitIdenticalToClassical) {
  StateSampler sampler(4);
  const std::vector<double> b{0.2, 0.0, 0.7};
  const auto cc = casimir(Realization::classical(3, b)), cd = casimir(Realization::deformed(3, 0.0, b));
  for (int k = 0; k < 50; ++k) {
    const auto s = sampler.next(3);
    EXPECT_EQ(evaluate(cc, s), evaluate(cd, s));
  }
}

TEST(ClassicalIntegrals, Examples) {
  const auto fam = classical_integrals(2);
  EXPECT_EQ(evaluate(fam.left[0], kState), 4.0);
  EXPECT_EQ(evaluate(classical_integrals(2, {1, 1}).left[0], PhaseState({1.0, 1.0}, {0.0, 0.0})), 4.0);
  const auto f3 = classical_integrals(3);
  for (const auto& c : f3.distinct()) EXPECT_EQ(evaluate(c, PhaseState({0.3, 1.0, -2.0}, {0, 0, 0})), 0.0);
}

TEST(ClassicalIntegrals, Structure) {
  const auto fam = classical_integrals(4, {0.1, 0.2, 0.3, 0.4});
  ASSERT_EQ(fam.left.size(), 3u);
  ASSERT_EQ(fam.right.size(), 3u);
  EXPECT_EQ(fam.left.back().name(), "C^(4)");
  EXPECT_EQ(fam.right.front().name(), "C_(2)");
  EXPECT_EQ(fam.distinct().size(), 5u);  // 2N - 3
  StateSampler sampler(8);
  const auto s = sampler.next(4);
  EXPECT_EQ(evaluate(fam.left.back(), s), evaluate(fam.right.back(), s));
  EXPECT_THROW(classical_integrals(1), InvalidArgument);
}

TEST(ClassicalIntegrals, FullMemberIsCasimir) {
  StateSampler sampler(6);
  const auto fam = classical_integrals(4);
  const auto c = casimir(Realization::classical(4));
  for (int k = 0; k < 50; ++k) {
    const auto s = sampler.next(4);
    const double a = evaluate(fam.casimir_full, s), b = evaluate(c, s);
    EXPECT_LE(std::abs(a - b), 1e-12 * (1 + std::max(std::abs(a), std::abs(b))));
  }
}

TEST(DeformedIntegrals, TwoSiteMemberIsCasimir) {
  StateSampler sampler(7);
  const double z = 0.45;
  const std::vector<double> b{0.5, 0.25};
  const auto fam = deformed_integrals(2, z, b);
  const auto c = casimir(Realization::deformed(2, z, b));
  ASSERT_EQ(fam.left.size(), 1u);
  for (int k = 0; k < 50; ++k) {
    const auto s = sampler.next(2);
    EXPECT_EQ(evaluate(fam.left[0], s), evaluate(c, s));
    const double ref = oracle::deformed2_casimir(z, s.q()[0], s.q()[1], s.p()[0], s.p()[1], b[0], b[1]);
    EXPECT_NEAR(evaluate(fam.left[0], s), ref, 1e-12 * (1 + std::abs(ref)));
  }
}

TEST(DeformedIntegrals, Example) {
  const PhaseState s({1.0, 1.0}, {1.0, 0.0});
  const auto fam = deformed_integrals(2, 0.3);
  const auto g = make_generators(Realization::deformed(2, 0.3));
  const double jp = evaluate(g.jp, s), j3 = evaluate(g.j3, s);
  EXPECT_NEAR(evaluate(fam.left[0], s), std::sinh(0.6) / 0.3 * jp - j3 * j3, 1e-14);
}

TEST(DeformedIntegrals, ZeroDeformationMatchesClassical) {
  StateSampler sampler(10);
  const std::vector<double> b{0.0, 0.7, 0.2, 0.0};
  const auto d = deformed_integrals(4, 0.0, b).distinct();
  const auto c = classical_integrals(4, b).distinct();
  ASSERT_EQ(d.size(), c.size());
  for (int k = 0; k < 30; ++k) {
    const auto s = sampler.next(4);
    for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_EQ(evaluate(d[i], s), evaluate(c[i], s)) << d[i].name();
    }
  }
}

TEST(DeformedIntegrals, InvolutionWithFreeHamiltonian) {
  const auto r = Realization::deformed(3, 0.2);
  const Observable h = 0.5 * make_generators(r).jp;
  EXPECT_TRUE(verify_involution(h, deformed_integrals(3, 0.2), 100, 1e-9, 42).pass);
}

TEST(DeformedIntegrals, RightOrderConventions) {
  const auto r = Realization::deformed(4, 0.5, {0.2, 0.1, 0.0, 0.3});
  const Observable h = 0.5 * make_generators(r).jp;
  const auto asc = verify_involution(h, deformed_integrals(4, 0.5, r.b, SiteOrder::ascending), 50, 1e-9, 3);
  EXPECT_TRUE(asc.pass) << asc.worst_relation << " " << asc.max_residual;
  const auto desc = verify_involution(h, deformed_integrals(4, 0.5, r.b, SiteOrder::descending), 50, 1e-9, 3);
  EXPECT_FALSE(desc.pass);
}

TEST(VerifyAlgebra, ClassicalAndDeformedPass) {
  for (std::size_t n : {2u, 3u, 4u}) {
    EXPECT_TRUE(verify_algebra(Realization::classical(n, random_b(n, 11 + n))).pass);
    for (double z : {0.1, -0.1, 1.0, -1.0}) {
      const auto rep = verify_algebra(Realization::deformed(n, z, random_b(n, 13 + n)));
      EXPECT_TRUE(rep.pass) << "n=" << n << " z=" << z << " " << rep.worst_relation << " " << rep.max_residual;
    }
  }
}

TEST(VerifyAlgebra, ReportFields) {
  const auto rep = verify_algebra(Realization::classical(2), 10, 1e-9, 5);
  EXPECT_EQ(rep.samples, 10u);
  EXPECT_EQ(rep.seed, 5u);
  EXPECT_EQ(rep.checks.size(), 6u);
  EXPECT_EQ(rep.pass, rep.max_residual <= rep.tol);
  EXPECT_EQ(rep.worst_state.dim(), 2u);
}

TEST(VerifyAlgebra, CorruptedGeneratorFails) {
  // J+ with the ordering factor of site 1 dropped
  const double z = 0.7;
  const auto r = Realization::deformed(2, z);
  auto g = make_generators(r);
  g.jp = Observable("Jp_bad", 2, [z](auto q, auto p) {
    using std::exp;
    const auto x1 = z * (q[0] * q[0]), x2 = z * (q[1] * q[1]);
    return sinhc(x1) * (p[0] * p[0]) + sinhc(x2) * (p[1] * p[1]) * exp(-x1);
  });
  const auto rep = verify_relations(g, casimir(r), r.kind, z, 100, 1e-9, 42);
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.max_residual, 1e-3);
}

TEST(VerifyInvolution, TheoremExamples) {
  const auto r4 = Realization::classical(4);
  EXPECT_TRUE(verify_involution(0.5 * make_generators(r4).jp, classical_integrals(4)).pass);
  const auto r3 = Realization::classical(3);
  const auto g = make_generators(r3);
  const Observable hp("HP", 3, [g](auto q, auto p) {
    const auto a = 1.0 - 0.5 * g.jm(q, p);
    return 0.5 * a * a * g.jp(q, p);
  });
  EXPECT_TRUE(verify_involution(hp, classical_integrals(3)).pass);
}

TEST(VerifyInvolution, NegativeControl) {
  const auto h = compile_raw(expr::parse("q1*p2"), 2);
  const auto rep = verify_involution(h, classical_integrals(2));
  EXPECT_FALSE(rep.pass);
}

TEST(ExtraIntegral, Values) {
  EXPECT_NEAR(evaluate(extra_integral_ms(0.5), PhaseState({1.0, 0.3}, {2.0, 0.1})), 3.4365636569180904707, 1e-14);
  EXPECT_EQ(evaluate(extra_integral_ms(0.0), PhaseState({1.3, 0.3}, {2.0, 0.1})), 2.0);
  EXPECT_THROW(extra_integral_ms(0.5, 2.0), InvalidArgument);
}

TEST(ExtraIntegral, CommutesWithMsHamiltonian) {
  for (double z : {0.2, -0.2, 0.8, -0.8})
    for (double sign : {1.0, -1.0}) {
      const auto r = Realization::deformed(2, z);
      const auto g = make_generators(r);
      const Observable h("H", 2, [g, z, sign](auto q, auto p) {
        using std::exp;
        return 0.5 * g.jp(q, p) * exp(sign * z * g.jm(q, p));
      });
      IntegralFamily fam;
      fam.left = {extra_integral_ms(z, sign)};
      fam.right = {fam.left[0]};
      fam.casimir_full = fam.left[0];
      EXPECT_TRUE(verify_involution(h, fam).pass) << "z=" << z << " sign=" << sign;
    }
}

TEST(Independence, Examples) {
  const auto h = 0.5 * make_generators(Realization::classical(2)).jp;
  StateSampler sampler(12);
  std::vector<PhaseState> states;
  for (int k = 0; k < 5; ++k) states.push_back(sampler.next(2));
  EXPECT_EQ(functional_independence({h, 2.0 * h, h * h}, states), 1);
  EXPECT_EQ(functional_independence({coordinate_q(2, 0), momentum_p(2, 0)}, states), 2);
}
