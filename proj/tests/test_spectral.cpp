#include <gtest/gtest.h>

#include "hbl/spectral.hpp"

using namespace hbl;

namespace {

const std::vector<CorpusEntry>& corpus() {
  static const auto c = spectral_corpus();
  return c;
}

const CorpusEntry& corpus_entry(const std::string& label) {
  for (const auto& e : corpus())
    if (e.f.label() == label) return e;
  throw std::runtime_error("no corpus entry " + label);
}

double table_distance(const std::map<std::pair<int, int>, FloatBigraded>& a, const std::map<std::pair<int, int>, FloatBigraded>& b,
                      int k, int n, const std::vector<Point>& probes) {
  double d = 0;
  for (const auto& z : probes) d = std::max(d, std::abs(evaluate_table(a, k, n, z) - evaluate_table(b, k, n, z)));
  return d;
}

}  // namespace

TEST(SpectralProjection, DistinctLaguerreFunctionsAnnihilate) {
  auto probes = default_probes(1, 2.0, 5, 3);
  for (const auto& v : spectral_projection(phi_function(1, 1), 3, 1, probes)) EXPECT_LT(std::abs(v), 1e-10);
}

TEST(SpectralProjection, LaguerreFunctionIsReproduced) {
  auto probes = default_probes(1, 2.0, 5, 3);
  auto v = spectral_projection(phi_function(3, 1), 3, 1, probes);
  for (std::size_t i = 0; i < probes.size(); ++i) EXPECT_NEAR(std::abs(v[i] - 2 * kPi * eval_phi(3, 1, probes[i])), 0, 1e-9);
}

TEST(SpectralProjection, PlantedTypeMatchesClosedForm) {
  const auto& e = corpus_entry("z e^{-r^2/3}");
  auto probes = default_probes(1, 2.0, 6, 4);
  auto v = spectral_projection(e.f.function(), e.k, 1, probes);
  auto planted = planted_expansion(e.f, e.k);
  for (std::size_t i = 0; i < probes.size(); ++i)
    EXPECT_NEAR(std::abs(v[i] - evaluate_table(planted, e.k, 1, probes[i])), 0, 1e-9);
}

TEST(SpectralProjection, SlowDecayRefused) {
  PointFunction f = [](const Point& z) { return cplx(1 / (1 + z.norm_sq())); };
  EXPECT_THROW(spectral_projection(f, 0, 1, {Point{cplx(0)}}), domain_error);
}

TEST(RadialProfile, CachedInnerProductsAreRefinementStable) {
  RadialProfile f("gauss", [](double r) { return std::exp(-r * r / 2); });
  const double a = f.inner(2, 0.0, 1);
  EXPECT_EQ(a, f.inner(2, 0.0, 1));
  RadialProfile g("gauss", [](double r) { return std::exp(-r * r / 2); }, RadialRule{16.0, 32, 16});
  EXPECT_NEAR(a, g.inner(2, 0.0, 1), 1e-10 * std::abs(a));
}

TEST(RadialProfile, UnresolvedRuleRefused) {
  RadialProfile f("wiggly", [](double r) { return std::cos(12 * r) * std::exp(-r * r / 8); }, RadialRule{16.0, 1, 8});
  EXPECT_THROW(f.inner(0, 0.0, 1), truncation_error);
}

TEST(RadialProfile, GaussianLaguerreCoefficientsMatchGeneratingFunction) {
  // e^{-r^2/2} = (2/3) sum_k 3^{-k} phi_k^0 for n = 1, so <f, phi_k> = (2/3) 3^{-k} ||phi_k||^2
  RadialProfile f("gauss", [](double r) { return std::exp(-r * r / 2); });
  for (int k = 0; k <= 12; ++k) {
    const double oracle = 2.0 / 3 * std::pow(3.0, -k) * sphere_area(1) * phi_norm_sq(k, 1).get_d();
    EXPECT_NEAR(f.laguerre_coefficient(k, 1), oracle, 1e-12) << k;
  }
}

TEST(ExtractExpansion, RadialFunctionHasOnlyTheRadialEntry) {
  const auto& e = corpus_entry("gaussian");
  auto ex = extract_expansion(e.f.function(), 2, 1);
  ASSERT_EQ(ex.table.size(), 1u);
  ASSERT_TRUE(ex.table.count({0, 0}));
  // Q_k = B_k <f, phi_k> phi_k
  RadialProfile prof("gauss", e.f.terms().front().profile);
  const double expected = radial_projection_constant(2, 1).get_d() * prof.laguerre_coefficient(2, 1);
  EXPECT_NEAR(std::abs(ex.table.at({0, 0})(Point{cplx(0.3, 0.2)}) - expected), 0, 1e-12 * std::abs(expected));
}

TEST(ExtractExpansion, PlantedTypeFunctionHasSingleEntry) {
  const auto& e = corpus_entry("phi_0^2 z1");
  auto ex = extract_expansion(e.f.function(), 1, 2);
  ASSERT_EQ(ex.table.size(), 1u);
  ASSERT_TRUE(ex.table.count({1, 0}));
  const FloatBigraded& P = ex.table.at({1, 0});
  EXPECT_LT(laplacian(P.poly()).max_abs_coefficient(), 1e-12);
  auto planted = planted_expansion(e.f, 1);
  EXPECT_LT(table_distance(ex.table, planted, 1, 2, default_probes(2, 1.0, 6, 8)), 1e-10);
}

TEST(ExtractExpansion, ZeroFunctionGivesEmptyExpansion) {
  auto ex = extract_expansion([](const Point&) { return cplx(0); }, 2, 1);
  EXPECT_TRUE(ex.empty());
  EXPECT_EQ(ex.tail.value, 0.0);
}

TEST(ExtractExpansion, IndicesRespectTheProjectionIndex) {
  for (const auto& e : corpus()) {
    if (e.f.dim() != 1) continue;
    auto ex = extract_expansion(e.f.function(), e.k, 1);
    for (const auto& [pq, P] : ex.table) {
      EXPECT_LE(pq.first, e.k);
      EXPECT_LE(pq.second, ex.q_max);
      EXPECT_LT(laplacian(P.poly()).max_abs_coefficient(), 1e-10 * std::max(P.poly().max_abs_coefficient(), 1.0));
    }
    EXPECT_LT(table_distance(ex.table, planted_expansion(e.f, e.k), e.k, 1, default_probes(1, 2.0, 8, 9)), 1e-10)
        << e.f.label();
  }
}

TEST(ExtractExpansion, InsufficientRadialResolutionRefused) {
  const auto& e = corpus_entry("z e^{-r^2/3}");
  ExtractionOptions o;
  o.radial = RadialRule{12.0, 1, 6};
  EXPECT_THROW(extract_expansion(e.f.function(), 2, 1, o), truncation_error);
}

TEST(ExtractExpansion, CutoffTooSmallRefused) {
  const auto& e = corpus_entry("z e^{-r^2/3}");
  ExtractionOptions o;
  o.radial = RadialRule{4.0, 4, 16};
  EXPECT_THROW(extract_expansion(e.f.function(), 2, 1, o), truncation_error);
}

TEST(ExtractExpansion, Deterministic) {
  const auto& e = corpus_entry("e^{-r^2/2}(1 + zbar/2)");
  auto a = extract_expansion(e.f.function(), e.k, 1), b = extract_expansion(e.f.function(), e.k, 1);
  ASSERT_EQ(a.table.size(), b.table.size());
  for (const auto& [pq, P] : a.table) EXPECT_TRUE(P == b.table.at(pq));
  EXPECT_EQ(a.tail.value, b.tail.value);
}

TEST(TailBound, DecreasesToZeroInQmax) {
  double prev = std::numeric_limits<double>::infinity();
  for (int qm = 6; qm <= 40; qm += 2) {
    auto t = tail_bound(2, 2, 2.0, qm, 1.0);
    EXPECT_LT(t.value, prev);
    prev = t.value;
  }
  EXPECT_LT(prev, 1e-12);
}

TEST(TailBound, VanishesAtTheOrigin) {
  EXPECT_EQ(tail_bound(3, 2, 0.0, 10, 5.0).value, 0.0);
}

TEST(TailBound, IncreasesWithRadius) {
  for (int n : {1, 2, 3}) EXPECT_GT(tail_bound(2, n, 4.0, 12, 1.0).value, tail_bound(2, n, 2.0, 12, 1.0).value);
}

TEST(TailBound, NotClaimedBelowThreshold) {
  auto t = tail_bound(2, 2, 1.0, 5, 1.0);
  EXPECT_FALSE(t.claimed());
  EXPECT_EQ(t.threshold, 6);
  EXPECT_TRUE(tail_bound(2, 2, 1.0, 6, 1.0).claimed());
}

TEST(TailBound, MajorizesAKnownTail) {
  // f = e^{-r^2/2} zbar^q types with q above q_max contribute to Q_k through the discarded series
  TypeMixture f(1, "high q");
  f.add(gaussian_profile(2), monomial_type(1, {}, {12}));
  const int k = 1;
  ExtractionOptions o;
  o.q_max = 9;
  o.ball_radius = 1.5;
  auto ex = extract_expansion(f.function(), k, 1, o);
  EXPECT_TRUE(ex.empty());
  auto planted = planted_expansion(f, k);
  double worst = 0;
  for (const auto& z : default_probes(1, 1.0, 10, 2)) worst = std::max(worst, std::abs(evaluate_table(planted, k, 1, z)));
  EXPECT_GT(worst, 0);
  EXPECT_LE(worst, ex.tail.value);
}

TEST(EvaluateExpansion, OutsideBallRefused) {
  const auto& e = corpus_entry("gaussian");
  auto ex = extract_expansion(e.f.function(), 1, 1);
  EXPECT_THROW(evaluate_expansion(ex, Point{cplx(3.0, 0)}), domain_error);
}

TEST(EvaluateExpansion, OriginSeesOnlyTheRadialTerm) {
  const auto& e = corpus_entry("e^{-r^2/2}(1 + zbar/2)");
  auto ex = extract_expansion(e.f.function(), e.k, 1);
  ASSERT_TRUE(ex.table.count({0, 1}));
  const Point o{cplx(0)};
  EXPECT_NEAR(std::abs(evaluate_expansion(ex, o) - ex.table.at({0, 0})(o) * eval_phi(e.k, 1, o)), 0, 1e-14);
}

TEST(EvaluateExpansion, AgreesWithDirectProjection) {
  for (const std::string label : {"(1+r^2) z^2 e^{-r^2/2.5} + 0.3 zbar e^{-r^2/2}", "e^{-r^2/2}(zbar1 + z1 z2/2)"}) {
    const auto& e = corpus_entry(label);
    const int n = e.f.dim();
    auto ex = extract_expansion(e.f.function(), e.k, n);
    auto probes = default_probes(n, n == 1 ? 1.4 : 1.0, n == 1 ? 6 : 2, 31);
    auto direct = spectral_projection(e.f.function(), e.k, n, probes);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const double d = std::abs(evaluate_expansion(ex, probes[i]) - direct[i]);
      EXPECT_LE(d, ex.tail.value + 1e-4);
      EXPECT_LT(d, 1e-8) << label;
    }
  }
}

TEST(SpecialHermite, LaguerreFunctionExactFromItsIndex) {
  auto probes = default_probes(1, 2.0, 5, 12);
  auto r = special_hermite_reconstruct(phi_function(3, 1), 1, 5, probes);
  for (int K = 0; K < 3; ++K) EXPECT_GT(r.residuals[K], 1e-2);
  for (int K = 3; K <= 5; ++K) EXPECT_LT(r.residuals[K], 1e-10);
}

TEST(SpecialHermite, GaussianConvergesMonotonically) {
  auto probes = default_probes(1, 2.0, 10, 5);
  auto r = special_hermite_reconstruct([](const Point& z) { return cplx(std::exp(-z.norm_sq() / 2)); }, 1, 12, probes);
  for (std::size_t K = 1; K < r.residuals.size(); ++K) EXPECT_LE(r.residuals[K], r.residuals[K - 1]);
  EXPECT_LT(r.residuals.back(), 1e-4);
}

TEST(SpecialHermite, ZeroFunction) {
  auto r = special_hermite_reconstruct([](const Point&) { return cplx(0); }, 1, 3, default_probes(1, 1.0, 3));
  for (double v : r.residuals) EXPECT_EQ(v, 0.0);
}

TEST(EigenfunctionProperty, SecondOrderResidual) {
  const auto& e = corpus_entry("(1+r^2) z^2 e^{-r^2/2.5} + 0.3 zbar e^{-r^2/2}");
  auto c = eigen_residual_check(e.f.function(), e.k, 1, default_probes(1, 1.5, 4, 7));
  EXPECT_LT(c.levels[1].residual, 0.05);
  EXPECT_NEAR(c.order, 2.0, 0.15);
}

TEST(EigenfunctionProperty, RotationTermNeededOffTheRadialClass) {
  const auto& e = corpus_entry("(1+r^2) z^2 e^{-r^2/2.5} + 0.3 zbar e^{-r^2/2}");
  auto probes = default_probes(1, 1.5, 4, 7);
  auto bad = eigen_residual_check(e.f.function(), e.k, 1, probes, {0.2, 0.1}, {}, false);
  EXPECT_GT(bad.levels[1].residual, 0.5);
  const auto& g = corpus_entry("gaussian");
  auto radial = eigen_residual_check(g.f.function(), g.k, 1, probes, {0.2, 0.1}, {}, false);
  EXPECT_NEAR(radial.order, 2.0, 0.15);
}

TEST(Parseval, LayeredNormMatchesDirectQuadrature) {
  const auto& e = corpus_entry("z e^{-r^2/3}");
  auto ex = extract_expansion(e.f.function(), e.k, 1);
  auto c = parseval_check(e.f.function(), ex);
  EXPECT_LT(c.rel_err, 1e-3);
}

TEST(Parseval, RejectsHigherDimension) {
  const auto& e = corpus_entry("phi_0^2 z1");
  auto ex = extract_expansion(e.f.function(), e.k, 2);
  EXPECT_THROW(parseval_check(e.f.function(), ex), precondition_error);
}

TEST(TypeMixture, RejectsNonHarmonicPolynomial) {
  TypeMixture f(1, "bad");
  Polynomial<cplx> P(1);
  Monomial m;
  m.alpha[0] = 1;
  m.beta[0] = 1;
  P.add_term(m, 1.0);
  EXPECT_THROW(f.add(gaussian_profile(2), FloatBigraded(1, 1, 1, P)), precondition_error);
}

TEST(SphereExperiment, RecoversPlantedLaguerreCoefficientAndFlagsZeroRadius) {
  // phi_{k}^{2}(R) vanishes at R^2/2 = 3 for k = 1 (L_1^2(x) = 3 - x)
  auto P = monomial_type(2, {1, 0}, {});
  auto profile = [](double r) { return phi_radial(2, 1.0, r); };
  SphereExperimentOptions o;
  o.k_max = 4;
  auto x = sphere_injectivity_experiment(profile, P, {std::sqrt(6.0), 1.5}, o);
  const double norm = sphere_area(2) * phi_norm_sq(2, 2).get_d();
  for (const auto& rep : x.radii)
    for (const auto& row : rep.rows) {
      EXPECT_TRUE(row.constrained);
      if (!row.pinned) continue;
      EXPECT_NEAR(row.recovered->real(), row.k == 2 ? norm : 0.0, 1e-4 * norm) << "R=" << rep.R << " k=" << row.k;
    }
  const auto& at_zero = x.radii[0].rows[1];
  EXPECT_FALSE(at_zero.pinned);
  EXPECT_LT(at_zero.root_distance, 1e-12);
  EXPECT_TRUE(x.radii[1].rows[1].pinned);
  EXPECT_TRUE(x.unresolved.empty());
  EXPECT_LT(x.max_recovery_error, 1e-4);
}

TEST(SphereExperiment, ZeroFunctionPinsEverything) {
  auto P = monomial_type(1, {1}, {});
  auto x = sphere_injectivity_experiment([](double) { return 0.0; }, P, {1.3});
  EXPECT_TRUE(x.all_pinned_zero);
  for (const auto& row : x.radii[0].rows) EXPECT_LT(std::abs(*row.recovered), 1e-8);
}

TEST(SphereExperiment, LowIndicesUnconstrainedByAntiholomorphicWeight) {
  auto P = monomial_type(1, {}, {2});
  SphereExperimentOptions o;
  o.k_max = 4;
  auto x = sphere_injectivity_experiment([](double r) { return phi_radial(3, 0.0, r); }, P, {1.1}, o);
  EXPECT_EQ(x.unconstrained, (std::vector<int>{0, 1}));
  const double norm = sphere_area(1) * phi_norm_sq(3, 1).get_d();
  EXPECT_NEAR(x.radii[0].rows[3].recovered->real(), norm, 1e-4 * norm);
}

TEST(SphereExperiment, DecayHypothesisEnforced) {
  auto P = monomial_type(1, {1}, {});
  EXPECT_THROW(sphere_injectivity_experiment([](double r) { return std::exp(-r * r / 8); }, P, {1.0}), hypothesis_error);
}

TEST(ConeExperiment, RecoversPlantedType) {
  TypeMixture f(2, "planted (1,0)");
  f.add(gaussian_profile(2), monomial_type(2, {1, 0}, {}));
  const double s = 1 / std::sqrt(2.0);
  auto x = cone_injectivity_experiment(f, {Point{cplx(s, 0), cplx(0, s)}});
  EXPECT_LT(x.max_rel_error, 1e-3);
  EXPECT_LT(x.max_weight_error, 1e-3);
  EXPECT_TRUE(x.injective_for_class);
  for (const auto& r : x.rows) EXPECT_EQ(!r.forced_zero, r.s == 1 && r.t == 0 && r.k >= 1) << r.k << r.s << r.t;
}

TEST(ConeExperiment, ConeInsideZeroSetDetected) {
  TypeMixture f(2, "z1 types");
  f.add(gaussian_profile(2), monomial_type(2, {1, 0}, {}));
  f.add(gaussian_profile(3), monomial_type(2, {1, 0}, {0, 1}));
  const double s = 1 / std::sqrt(2.0);
  auto x = cone_injectivity_experiment(f, {Point{cplx(0), cplx(1)}, Point{cplx(0), cplx(s, s)}});
  EXPECT_TRUE(x.non_injective_detected);
  EXPECT_FALSE(x.injective_for_class);
  EXPECT_EQ(x.vanishing_types.size(), 2u);
}

TEST(ConeExperiment, FrequenciesDecouple) {
  EXPECT_LT(cone_frequency_coupling(2, 2, 4, 16, 2.5, 16), 1e-12);
}

TEST(ConeExperiment, IllConditionedFitRefused) {
  TypeMixture f(2, "planted");
  f.add(gaussian_profile(2), monomial_type(2, {1, 0}, {}));
  ConeOptions o;
  o.condition_limit = 2.0;
  EXPECT_THROW(cone_injectivity_experiment(f, {Point{cplx(1), cplx(0)}}, o), truncation_error);
}
