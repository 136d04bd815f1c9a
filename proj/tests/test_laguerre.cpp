#include <gtest/gtest.h>

#include <random>

#include "hbl/laguerre.hpp"
#include "hbl/quadrature.hpp"

using namespace hbl;

namespace {

// Independent oracle: exact three-term recurrence on coefficient lists.
RationalPoly recurrence_oracle(int k, const Rational& a) {
  RationalPoly l0({1});
  if (k == 0) return l0;
  RationalPoly l1({1 + a, -1});
  RationalPoly x({0, 1});
  for (int j = 2; j <= k; ++j) {
    std::vector<Rational> c(j + 1, Rational(0));
    const auto& p1 = l1.coeffs();
    for (std::size_t i = 0; i < p1.size(); ++i) {
      c[i] += (2 * j - 1 + a) * p1[i];
      c[i + 1] -= p1[i];
    }
    const auto& p0 = l0.coeffs();
    for (std::size_t i = 0; i < p0.size(); ++i) c[i] -= (j - 1 + a) * p0[i];
    for (auto& v : c) v /= j;
    l0 = l1;
    l1 = RationalPoly(c);
  }
  return l1;
}

}  // namespace

TEST(LaguerreCoeffs, HandExpandedExamples) {
  EXPECT_EQ(laguerre_coeffs(0, Rational(7, 3)), RationalPoly({1}));
  EXPECT_EQ(laguerre_coeffs(1, 1), RationalPoly({2, -1}));
  EXPECT_EQ(laguerre_coeffs(2, 0), RationalPoly({1, -2, Rational(1, 2)}));
}

TEST(LaguerreCoeffs, MatchesRecurrenceOracleForRationalOrders) {
  for (Rational a : {Rational(0), Rational(1), Rational(5), Rational(1, 2), Rational(-1, 3), Rational(7, 4)})
    for (int k = 0; k <= 12; ++k) EXPECT_EQ(laguerre_coeffs(k, a), recurrence_oracle(k, a)) << k << " " << a;
}

TEST(LaguerreCoeffs, LengthAndLeadingCoefficient) {
  for (int k = 0; k <= 15; ++k) {
    auto p = laguerre_coeffs(k, Rational(3, 2));
    EXPECT_EQ(p.coeffs().size(), static_cast<std::size_t>(k + 1));
    Rational lead = (k % 2 ? -1 : 1) / factorial(k);
    EXPECT_EQ(p.leading(), lead);
  }
}

TEST(LaguerreSpec, RejectsInvalid) {
  EXPECT_THROW(LaguerreSpec(-1, 0), precondition_error);
  EXPECT_THROW(LaguerreSpec(2, 0, 0), precondition_error);
  EXPECT_EQ(LaguerreSpec(2, 1, Rational(-3)).scale_sign(), -1);
}

TEST(LaguerreRecursions, ExactOnCoefficientsUpToTwelve) {
  LaguerreTable t;
  for (int k = 1; k <= 12; ++k)
    for (int a = 0; a <= 8; ++a) {
      EXPECT_TRUE(derivative_recursion_holds(t, k, a)) << k << "," << a;
      EXPECT_TRUE(shift_recursion_holds(t, k, a)) << k << "," << a;
    }
}

TEST(LaguerreRecursions, CorruptedTableIsDetected) {
  LaguerreTable t;
  t.set(3, 1, RationalPoly({4, -6, Rational(3), Rational(-1, 6)}));
  EXPECT_FALSE(derivative_recursion_holds(t, 3, 1));
}

TEST(LaguerreEval, FloatingRecurrenceAgreesWithExact) {
  for (int k = 0; k <= 20; ++k)
    for (double a : {0.0, 1.0, 3.0})
      for (double x : {0.0, 0.7, 3.3, 12.0}) {
        double exact = laguerre_coeffs(k, to_rational(a))(to_rational(x)).get_d();
        EXPECT_NEAR(laguerre_eval(k, a, x), exact, 1e-10 * (1 + std::abs(exact)));
      }
}

TEST(EvalPhi, Examples) {
  for (int n = 1; n <= 4; ++n) EXPECT_DOUBLE_EQ(eval_phi(0, n, Point(n)), 1.0);
  Point z{{1.0, 1.0}};  // |z|^2 = 2
  EXPECT_NEAR(eval_phi(1, 1, z), 0.0, 1e-15);
  for (int k = 0; k <= 10; ++k)
    for (int n = 1; n <= 4; ++n)
      EXPECT_NEAR(eval_phi(k, n, Point(n)), binomial(k + n - 1, k).get_d(), 1e-9);
}

TEST(EvalPhi, ScaledVariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    Point z{{g(rng), g(rng)}, {g(rng), g(rng)}};
    EXPECT_DOUBLE_EQ(eval_phi_scaled(3, 2, 1, z), eval_phi(3, 2, z));
    EXPECT_DOUBLE_EQ(eval_phi_scaled(3, 2, -1, z), eval_phi(3, 2, z));
  }
  Point u{{1.0, 0.0}};
  EXPECT_NEAR(eval_phi_scaled(0, 1, 2, u), std::exp(-1.0), 1e-15);
  EXPECT_THROW(eval_phi_scaled(0, 1, 0, u), precondition_error);
}

TEST(EvalPhi, RadialUnderRotations) {
  Point z{{0.4, -0.9}, {1.2, 0.3}};
  double ref = eval_phi(4, 2, z);
  for (int r = 0; r < 16; ++r) {
    double th = 2 * kPi * r / 16;
    Point w{z[0] * std::polar(1.0, th), z[1] * std::polar(1.0, -2 * th)};
    Point s{w[1], w[0]};
    EXPECT_NEAR(eval_phi(4, 2, s), ref, 1e-13);
  }
}

TEST(PhiNormSq, ClosedFormValues) {
  EXPECT_EQ(phi_norm_sq(0, 1), 1);
  EXPECT_EQ(phi_norm_sq(0, 2), 2);
  EXPECT_EQ(phi_norm_sq(2, 3), 48);
}

TEST(PhiNormSq, OrthogonalityByQuadrature) {
  for (int gamma = 1; gamma <= 6; ++gamma) {
    auto rule = RadialRule{gaussian_cutoff(0.5, 1e-20, 2 * gamma + 32), 24, 20}.build();
    for (int j = 0; j <= 8; ++j)
      for (int k = 0; k <= 8; ++k) {
        double v = radial_integral(
            [&](double r) { return phi_radial(j, gamma - 1, r) * phi_radial(k, gamma - 1, r); }, 2 * gamma - 1, rule);
        double expect = j == k ? phi_norm_sq(k, gamma).get_d() : 0.0;
        double scale = phi_norm_sq(std::max(j, k), gamma).get_d();
        EXPECT_NEAR(v, expect, 1e-10 * scale) << j << "," << k << "," << gamma;
      }
  }
}

TEST(RadialProjectionConstant, Values) {
  for (int n = 1; n <= 4; ++n) EXPECT_EQ(radial_projection_constant(0, n), 1);
  EXPECT_EQ(radial_projection_constant(1, 2), Rational(1, 2));
}

TEST(CommonZeroScan, SmallCases) {
  EXPECT_TRUE(common_zero_scan(0, 1, 0, 30, Rational(1, 1000000)).candidates.empty());
  auto s = common_zero_scan(1, 2, 0, 30, Rational(1, 1000000));
  EXPECT_TRUE(s.candidates.empty());
  ASSERT_EQ(s.roots1.size(), 1u);
  EXPECT_LE(s.roots1[0].lo, 1);
  EXPECT_GE(s.roots1[0].hi, 1);
  EXPECT_NE(laguerre_coeffs(2, 0)(1), 0);
  auto s34 = common_zero_scan(3, 4, 1, 30, to_rational(1e-12));
  EXPECT_TRUE(s34.candidates.empty());
  EXPECT_EQ(s34.roots1.size(), 3u);
  EXPECT_EQ(s34.roots2.size(), 4u);
  EXPECT_EQ(s34.gcd_degree, 0);
}

TEST(CommonZeroScan, DetectsSharedRoot) {
  // A genuinely shared root keeps the intervals overlapping under refinement.
  RationalPoly p({-2, 1}), q({-2, -1, 1});  // roots {2} and {2, -1}
  auto rp = isolate_roots(p, 0, 10, 10), rq = isolate_roots(q, 0, 10, 10);
  ASSERT_EQ(rp.size(), 1u);
  ASSERT_EQ(rq.size(), 1u);
  auto a = rp[0], b = rq[0];
  for (int i = 0; i < 60 && a.overlaps(b) && !(a.exact && b.exact); ++i) {
    bisect_root(p, a);
    bisect_root(q, b);
  }
  EXPECT_TRUE(a.overlaps(b));
}

TEST(CommonZeroScan, RootCountsMatchDegree) {
  // all zeros of L_k^a are real, positive and simple
  LaguerreZeroScanner s(2, 200, to_rational(1e-12));
  for (int k = 1; k <= 12; ++k) EXPECT_EQ(s.roots(k).size(), static_cast<std::size_t>(k));
}
