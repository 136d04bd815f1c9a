#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "hbl/twisted.hpp"

using namespace hbl;

namespace {

const GridGeometry kGrid1 = default_geometry(1);

double gaussian_profile(double r) { return std::exp(-r * r / 3) * (1 + r * r / 5); }

FloatBigraded first_harmonic(int n, int p, int q) { return harmonic_basis(n, p, q).elements.front().to_floating(); }

}  // namespace

TEST(TwistedConvolution, GroundStateNormalization) {
  auto g = GridFunction::sample(kGrid1, phi_function(0, 1));
  auto v = twisted_convolution(phi_function(0, 1), g, 1.0, {Point{cplx(0)}});
  EXPECT_NEAR(std::abs(v[0] - 2 * kPi), 0, 1e-10);
}

TEST(TwistedConvolution, OrthogonalityMatrixAtOrigin) {
  std::vector<GridFunction> grids;
  for (int k = 0; k <= 5; ++k) grids.push_back(GridFunction::sample(kGrid1, phi_function(k, 1)));
  const Point o{cplx(0)};
  for (int j = 0; j <= 5; ++j)
    for (int k = 0; k <= 5; ++k) {
      cplx v = twisted_convolution(phi_function(j, 1), grids[k], 1.0, {o})[0];
      double m = std::abs(v / (2 * kPi * eval_phi(k, 1, o)) - (j == k ? 1.0 : 0.0));
      EXPECT_LT(m, 1e-5) << j << "," << k;
    }
}

TEST(TwistedConvolution, DistinctIndicesAnnihilate) {
  auto g = GridFunction::sample(kGrid1, phi_function(1, 1));
  auto probes = default_probes(1, 3.0, 5);
  for (const auto& v : twisted_convolution(phi_function(0, 1), g, 1.0, probes)) EXPECT_LT(std::abs(v), 1e-10);
}

TEST(TwistedConvolution, ConjugateSymmetryInLambda) {
  // real radial f, g: conv(conj f, conj g, -lambda) = conj(conv(f, g, lambda))
  GridGeometry geo{1, 12.0, 128};
  auto f = GridFunction::sample(geo, [](const Point& z) { return cplx(gaussian_profile(z.norm())); });
  auto g = GridFunction::sample(geo, phi_function(2, 1));
  auto probes = default_probes(1, 2.5, 6);
  auto a = twisted_convolution(f, g, 1.0, probes);
  auto b = twisted_convolution(f.conj(), g.conj(), -1.0, probes);
  for (std::size_t i = 0; i < probes.size(); ++i) EXPECT_NEAR(std::abs(b[i] - std::conj(a[i])), 0, 1e-12);
}

TEST(TwistedConvolution, BilinearAtQuadratureLevel) {
  GridGeometry geo{1, 12.0, 96};
  auto f1 = GridFunction::sample(geo, phi_function(1, 1));
  auto f2 = GridFunction::sample(geo, [](const Point& z) { return cplx(0, 1) * std::exp(-z.norm_sq() / 2) * z[0]; });
  auto g = GridFunction::sample(geo, phi_function(0, 1));
  GridFunction sum = f1;
  for (std::size_t i = 0; i < sum.samples.size(); ++i) sum.samples[i] += 2.0 * f2.samples[i];
  auto probes = default_probes(1, 2.0, 4);
  auto a = twisted_convolution(sum, g, 1.0, probes);
  auto b = twisted_convolution(f1, g, 1.0, probes);
  auto c = twisted_convolution(f2, g, 1.0, probes);
  for (std::size_t i = 0; i < probes.size(); ++i) EXPECT_NEAR(std::abs(a[i] - b[i] - 2.0 * c[i]), 0, 1e-12);
}

TEST(TwistedConvolution, SecondOrderUnderRefinement) {
  auto probes = default_probes(1, 3.0, 5);
  auto worst = [&](int steps) {
    GridGeometry geo{1, 12.0, steps};
    double w = 0;
    for (int j = 0; j <= 2; ++j) {
      auto gj = GridFunction::sample(geo, phi_function(j, 1));
      for (int k = 0; k <= 2; ++k) {
        auto fk = GridFunction::sample(geo, phi_function(k, 1));
        auto v = twisted_convolution(fk, gj, 1.0, probes);
        for (std::size_t i = 0; i < probes.size(); ++i)
          w = std::max(w, std::abs(v[i] - (j == k ? 2 * kPi * eval_phi(k, 1, probes[i]) : 0.0)));
      }
    }
    return w;
  };
  const double coarse = worst(128), fine = worst(256);
  EXPECT_GE(coarse / fine, 4.0) << coarse << " " << fine;
}

TEST(TwistedConvolution, DeterministicAcrossThreadCounts) {
  GridGeometry geo{1, 12.0, 128};
  auto g = GridFunction::sample(geo, phi_function(1, 1));
  auto probes = default_probes(1, 2.0, 3);
  auto a = twisted_convolution(phi_function(1, 1), g, 1.0, probes, {1, 1000});
  auto b = twisted_convolution(phi_function(1, 1), g, 1.0, probes, {3, 1000});
  for (std::size_t i = 0; i < probes.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(TwistedConvolution, Guards) {
  GridGeometry geo{1, 4.0, 16};
  auto g = GridFunction::sample(geo, phi_function(0, 1));
  EXPECT_THROW(twisted_convolution(g, g, 1.0, {Point{cplx(2.5, 0)}}), domain_error);
  EXPECT_NO_THROW(twisted_convolution(g, g, 1.0, {Point{cplx(2.0, -2.0)}}));
  auto bad = g;
  bad.samples[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(twisted_convolution(bad, g, 1.0, {Point{cplx(0)}}), data_error);
  auto other = GridFunction::sample({1, 4.0, 32}, phi_function(0, 1));
  EXPECT_THROW(twisted_convolution(other, g, 1.0, {Point{cplx(0)}}), precondition_error);
  EXPECT_THROW((GridGeometry{1, 4.0, 15}.validate()), precondition_error);
  EXPECT_THROW((GridGeometry{3, 4.0, 16}.validate()), precondition_error);
}

TEST(TwistedConvolution, TwoDimensionalProbe) {
  auto geo = default_geometry(2);
  auto g = GridFunction::sample(geo, phi_function(1, 2));
  std::vector<Point> probes{Point{cplx(0.3, -0.2), cplx(0.1, 0.5)}};
  auto v = twisted_convolution(phi_function(1, 2), g, 1.0, probes);
  EXPECT_NEAR(std::abs(v[0] - std::pow(2 * kPi, 2) * eval_phi(1, 2, probes[0])), 0, 1e-6);
}

TEST(GridIO, RoundTrip) {
  auto dir = std::filesystem::temp_directory_path();
  GridGeometry geo{2, 3.0, 6};
  auto f = GridFunction::sample(geo, [](const Point& z) { return z[0] * std::conj(z[1]) + 0.25; }, "test");
  auto path = (dir / "hbl_grid_roundtrip.bin").string();
  write_grid(path, f);
  auto g = read_grid(path);
  EXPECT_EQ(g.geometry, f.geometry);
  EXPECT_EQ(g.samples, f.samples);
  EXPECT_EQ(g.provenance, "test");
  write_grid(path, f, true);
  auto h = read_grid(path);
  for (std::size_t i = 0; i < f.samples.size(); ++i) EXPECT_NEAR(std::abs(h.samples[i] - f.samples[i]), 0, 1e-5);
  {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    std::fputs("NOPE", fp);
    std::fclose(fp);
  }
  EXPECT_THROW(read_grid(path), data_error);
  std::filesystem::remove(path);
}

TEST(SphericalMean, UnitMassAndParity) {
  PointFunction one = [](const Point&) { return cplx(1); };
  for (int n = 1; n <= 2; ++n) {
    SphereMeasureSpec s;
    s.radius = 1.7;
    EXPECT_NEAR(std::abs(twisted_spherical_mean(one, s, Point(n)).value - 1.0), 0, 1e-12);
    s.weight = first_harmonic(n, 1, 0);
    PointFunction gauss = [](const Point& z) { return cplx(std::exp(-z.norm_sq() / 2)); };
    EXPECT_LT(std::abs(twisted_spherical_mean(gauss, s, Point(n)).value), 1e-13);
  }
}

TEST(SphericalMean, RadialAtOriginIsReal) {
  SphereMeasureSpec s;
  s.radius = 1.2;
  for (int n = 1; n <= 2; ++n)
    for (int k = 0; k <= 3; ++k) {
      auto r = twisted_spherical_mean(phi_function(k, n), s, Point(n));
      EXPECT_LT(std::abs(r.value.imag()), 1e-10);
    }
}

TEST(SphericalMean, UnderResolvedFlag) {
  SphereMeasureSpec s;
  s.radius = 3.0;
  s.nodes.n_theta = 8;
  auto r = twisted_spherical_mean(phi_function(0, 1), s, Point{cplx(2.0, 0)});
  EXPECT_TRUE(r.under_resolved);
  s.nodes.n_theta = 128;
  EXPECT_FALSE(twisted_spherical_mean(phi_function(0, 1), s, Point{cplx(2.0, 0)}).under_resolved);
}

TEST(RadialProjection, ConstantsAndSelfProjection) {
  EXPECT_EQ(radial_projection_constant(0, 3), Rational(1));
  EXPECT_EQ(radial_projection_constant(1, 2), Rational(1, 2));
  auto probes = default_probes(1, 2.5, 5);
  for (int k = 0; k <= 2; ++k) {
    auto c = radial_projection_check([k](double r) { return phi_radial(k, 0.0, r); }, k, 1, probes, kGrid1);
    EXPECT_LT(c.rel_err, 1e-10);
    // B_k <phi_k, phi_k> = (2 pi)^n
    EXPECT_NEAR(c.coefficient * radial_projection_constant(k, 1).get_d(), 2 * kPi, 1e-10);
  }
}

TEST(RadialProjection, GeneralProfiles) {
  auto probes = default_probes(1, 2.5, 5);
  for (int k = 0; k <= 3; ++k) {
    auto c = radial_projection_check(gaussian_profile, k, 1, probes, kGrid1);
    EXPECT_LT(c.rel_err, 1e-5) << k;
  }
}

TEST(RadialProjection, NonRadialRejected) {
  auto probes = default_probes(1, 1.0, 1);
  PointFunction f = [](const Point& z) { return cplx(std::exp(-z.norm_sq()) * (1 + z[0].real())); };
  EXPECT_THROW(require_radial(f, 1), precondition_error);
  EXPECT_NO_THROW(require_radial(phi_function(2, 2), 2));
}

TEST(HeckeBochner, WorkedExampleProportional) {
  // a = phi_0^{gamma-1}, P = z, k = 1, n = 1: (a P) x phi_1 is a multiple of z phi_0^2(z)
  const int gamma = 2;
  auto a = [](double r) { return phi_radial(0, gamma - 1.0, r); };
  FloatBigraded P(1, 1, 0, FloatPolynomial::z(1, 0));
  auto probes = default_probes(1, 2.0, 6);
  auto c = hecke_bochner_check(a, P, 1, probes, kGrid1);
  EXPECT_LT(c.rel_err, 1e-8);
  cplx ratio = c.lhs[0] / (probes[0][0] * phi_radial(0, gamma, probes[0].norm()));
  for (std::size_t i = 1; i < probes.size(); ++i)
    EXPECT_NEAR(std::abs(c.lhs[i] / (probes[i][0] * phi_radial(0, gamma, probes[i].norm())) - ratio), 0, 1e-8);
  EXPECT_NEAR(c.calibrated, c.closed_form, 1e-8 * c.closed_form);
}

TEST(HeckeBochner, VanishingBranch) {
  FloatBigraded P(1, 1, 0, FloatPolynomial::z(1, 0));
  auto c = hecke_bochner_check(gaussian_profile, P, 0, default_probes(1, 2.0, 4), kGrid1);
  EXPECT_TRUE(c.vanishing);
  EXPECT_LT(c.max_abs_lhs, 1e-6);
}

TEST(HeckeBochner, RadialCaseMatchesProjection) {
  auto probes = default_probes(1, 2.0, 4);
  FloatBigraded one(1, 0, 0, FloatPolynomial::constant(1, 1.0));
  for (int k = 0; k <= 2; ++k) {
    auto h = hecke_bochner_check(gaussian_profile, one, k, probes, kGrid1);
    auto r = radial_projection_check(gaussian_profile, k, 1, probes, kGrid1);
    EXPECT_LT(relative_error(h.rhs, r.rhs), 1e-8);
    EXPECT_LT(h.rel_err, 1e-5);
  }
}

TEST(HeckeBochner, LowDegreeTypesInOneDimension) {
  auto probes = default_probes(1, 2.0, 5);
  for (auto [p, q] : std::vector<std::pair<int, int>>{{1, 0}, {0, 1}, {2, 0}, {0, 2}})
    for (int k = 0; k <= 3; ++k) {
      auto c = hecke_bochner_check(gaussian_profile, first_harmonic(1, p, q), k, probes, kGrid1);
      if (c.vanishing)
        EXPECT_LT(c.max_abs_lhs, 1e-6);
      else
        EXPECT_LT(c.rel_err, 1e-4) << p << q << k;
    }
}

TEST(HeckeBochner, SlowDecayRefused) {
  FloatBigraded one(1, 0, 0, FloatPolynomial::constant(1, 1.0));
  auto slow = [](double r) { return 1 / (1 + r * r); };
  EXPECT_THROW(hecke_bochner_check(slow, one, 0, default_probes(1, 1.0, 2), kGrid1), precondition_error);
}

TEST(WeightedMean, VanishingBelowThreshold) {
  auto P = first_harmonic(2, 1, 2);
  for (int k = 0; k < 2; ++k) {
    auto fit = weighted_functional_check(P, k, 1.1, default_probes(2, 1.5, 4));
    EXPECT_TRUE(fit.vanishing);
    EXPECT_LT(fit.max_abs_lhs, 1e-10);
  }
}

TEST(WeightedMean, RadialConstantIsProjectionConstant) {
  for (int n = 1; n <= 2; ++n)
    for (int k = 0; k <= 3; ++k) {
      FloatBigraded one(n, 0, 0, FloatPolynomial::constant(n, 1.0));
      auto fit = weighted_functional_check(one, k, 1.3, default_probes(n, 1.5, 5));
      EXPECT_LT(fit.residual, 1e-8);
      EXPECT_NEAR(fit.constant.real(), radial_projection_constant(k, n).get_d(), 1e-8);
    }
}

TEST(WeightedMean, ShapeIndependentOfRadius) {
  auto P = first_harmonic(2, 1, 1);
  std::vector<Point> probes{Point{cplx(0.4, 0.1), cplx(-0.3, 0.7)}, Point{cplx(-0.8, 0.2), cplx(0.5, -0.1)}};
  auto a = weighted_functional_check(P, 2, 0.9, probes), b = weighted_functional_check(P, 2, 1.6, probes);
  cplx ra = a.lhs[0] / a.lhs[1], rb = b.lhs[0] / b.lhs[1];
  EXPECT_LT(std::abs(ra - rb), 1e-8 * std::abs(ra));
}

TEST(WeightedMean, CalibrationStableAndMatchesClosedForm) {
  for (auto [n, p, q, k] : std::vector<std::array<int, 4>>{{1, 0, 1, 2}, {2, 1, 1, 2}, {2, 2, 0, 1}}) {
    auto c = calibrate_constant(k, p, q, n);
    EXPECT_LT(c.uncertainty, 1e-4);
    EXPECT_LT(c.max_fit_residual, 1e-4);
    EXPECT_NEAR(c.value, c.closed_form, 1e-6 * c.closed_form);
  }
  EXPECT_THROW(calibrate_constant(0, 0, 1, 1), precondition_error);
}

TEST(WeightedMean, DegenerateProbeSetRejected) {
  FloatBigraded P(2, 1, 0, FloatPolynomial::z(2, 0));
  std::vector<Point> probes{Point{cplx(0), cplx(0.5, 0.1)}, Point{cplx(0), cplx(-0.2, 0.4)}};
  EXPECT_THROW(weighted_functional_check(P, 1, 1.0, probes), precondition_error);
}

TEST(HeisenbergDemo, ZeroInputGivesZero) {
  auto zero = [](cplx, double) { return cplx(0); };
  auto gauss = [](cplx z, double t) { return cplx(std::exp(-std::norm(z) - t * t)); };
  EXPECT_EQ(heisenberg_slice_demo(zero, gauss).residual, 0.0);
}

TEST(HeisenbergDemo, GaussiansAgreeAndRefine) {
  auto gauss = [](cplx z, double t) { return cplx(std::exp(-std::norm(z) - t * t)); };
  HeisenbergOptions o;
  auto coarse = heisenberg_slice_demo(gauss, gauss, o);
  o.slices = 33;
  auto fine = heisenberg_slice_demo(gauss, gauss, o);
  EXPECT_LE(coarse.residual, 2e-2);
  EXPECT_LE(fine.residual, coarse.residual / 2);
}

TEST(HeisenbergDemo, Guardrails) {
  auto gauss = [](cplx z, double t) { return cplx(std::exp(-std::norm(z) - t * t)); };
  HeisenbergOptions o;
  o.nz = 64;
  EXPECT_THROW(heisenberg_slice_demo(gauss, gauss, o), guardrail_error);
  o.nz = 16;
  o.slices = 65;
  EXPECT_THROW(heisenberg_slice_demo(gauss, gauss, o), guardrail_error);
}

TEST(HeisenbergDemo, ZeroFrequencyIsOrdinaryConvolution) {
  GridGeometry geo{1, 4.0, 16};
  auto f = GridFunction::sample(geo, [](const Point& z) { return cplx(std::exp(-z.norm_sq()), 0.1 * z[0].imag()); });
  auto g = GridFunction::sample(geo, phi_function(1, 1));
  std::vector<Point> probes{Point{cplx(0)}, Point{cplx(1.5, -1.0)}, Point{cplx(-2.0, 0.5)}};
  auto a = twisted_convolution(f, g, 0.0, probes);
  auto b = ordinary_convolution(f, g, probes);
  for (std::size_t i = 0; i < probes.size(); ++i) EXPECT_NEAR(std::abs(a[i] - b[i]), 0, 1e-12);
  auto gauss = [](cplx z, double t) { return cplx(std::exp(-std::norm(z) - t * t)); };
  HeisenbergOptions o;
  o.lambda = 0;
  EXPECT_LE(heisenberg_slice_demo(gauss, gauss, o).residual, 2e-2);
}
