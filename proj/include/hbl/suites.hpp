#pragma once

#include <fstream>
#include <random>
#include <sstream>

#include "hbl/generalized_laguerre.hpp"
#include "hbl/laguerre.hpp"
#include "hbl/report.hpp"
#include "hbl/twisted.hpp"
#include "hbl/weyl.hpp"

namespace hbl {

// Verification suites shared by the CLI and the acceptance binary. Each returns report rows in a fixed order;
// independent units run on the worker pool and are assembled by index.

struct Guardrails {
  int symbolic_pq = 6;
  int symbolic_k = 8;
  int symbolic_n = 3;
  int numeric_n = 2;
};

struct SymbolicRanges {
  int pq_max = 3;
  int k_max = 6;
  int n_max = 3;
  int threads = 1;
  std::uint64_t seed = 20;  // commutator monomials
};

inline void check_guardrails(const SymbolicRanges& r, const Guardrails& g = {}) {
  if (r.pq_max < 0 || r.k_max < 0 || r.n_max < 1) throw guardrail_error("ranges must be nonnegative and n >= 1");
  if (r.pq_max > g.symbolic_pq)
    throw guardrail_error("p+q <= " + std::to_string(g.symbolic_pq) + " for symbolic suites (got " + std::to_string(r.pq_max) + ")");
  if (r.k_max > g.symbolic_k)
    throw guardrail_error("k <= " + std::to_string(g.symbolic_k) + " for symbolic suites (got " + std::to_string(r.k_max) + ")");
  if (r.n_max > g.symbolic_n)
    throw guardrail_error("n <= " + std::to_string(g.symbolic_n) + " for symbolic suites (got " + std::to_string(r.n_max) + ")");
}

namespace detail {

inline json params_json(const std::vector<std::pair<std::string, std::string>>& p) {
  json j = json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

inline ReportRow exact_row(const std::string& suite, const std::string& identity, json params, const GaussianPolynomial& residual,
                           std::string branch = {}) {
  ReportRow r;
  r.suite = suite;
  r.identity = identity;
  r.parameters = std::move(params);
  r.exact = true;
  r.pass = residual.is_zero();
  r.residual = static_cast<double>(residual.poly().size());
  r.branch = std::move(branch);
  return r;
}

inline ReportRow numeric_row(const std::string& suite, const std::string& identity, json params, double residual,
                             double tolerance, std::string branch = {}) {
  ReportRow r;
  r.suite = suite;
  r.identity = identity;
  r.parameters = std::move(params);
  r.exact = false;
  r.residual = residual;
  r.tolerance = tolerance;
  r.pass = residual <= tolerance;  // NaN fails
  r.branch = std::move(branch);
  return r;
}

using Unit = std::function<std::vector<ReportRow>()>;

inline std::vector<ReportRow> run_units(const std::vector<Unit>& units, int threads) {
  std::vector<std::vector<ReportRow>> parts(units.size());
  parallel_for(units.size(), threads, [&](std::size_t i) { parts[i] = units[i](); });
  std::vector<ReportRow> out;
  for (auto& p : parts)
    for (auto& r : p) out.push_back(std::move(r));
  return out;
}

inline std::string lambda_str(const Rational& l) { return l.get_str(); }

}  // namespace detail

// Monomial and harmonic symbol identities, tau = tau', the commutator and the eigenfunction identity.
inline std::vector<ReportRow> symbolic_suite(const SymbolicRanges& r) {
  check_guardrails(r);
  using detail::exact_row;
  HarmonicBasisCache bases(HarmonicBounds{4, std::max(8, r.pq_max)});
  std::vector<detail::Unit> units;
  const std::vector<Rational> lambdas{1, -1};

  for (int n = 1; n <= r.n_max; ++n)
    for (const Rational& lambda : lambdas)
      for (int k = 0; k <= r.k_max; ++k) {
        std::vector<std::shared_ptr<const HarmonicBasis>> bs;
        for (int p = 0; p <= r.pq_max; ++p)
          for (int q = 0; p + q <= r.pq_max; ++q) bs.push_back(bases.get(n, p, q));
        units.push_back([n, lambda, k, bs] {
          std::vector<ReportRow> rows;
          WeylApplicator app(lambda, phi_gaussian(k, n - 1, n, lambda));
          for (const auto& B : bs)
            for (std::size_t i = 0; i < B->size(); ++i) {
              const auto& Y = B->elements[i];
              json params = {{"n", n}, {"p", B->p}, {"q", B->q}, {"k", k}, {"lambda", detail::lambda_str(lambda)}, {"basis", i}};
              auto h = harmonic_symbol_residual(Y, k, lambda, BranchConvention::consistent, &app);
              rows.push_back(exact_row("symbolic", "harmonic_symbol", params, h.check.residual, h.check.branch));
              rows.push_back(exact_row("symbolic", "tau_equals_tau_prime", params, app.tau(Y.poly()) - app.tau_prime(Y.poly())));
            }
          return rows;
        });
      }

  units.push_back([r] {
    std::vector<ReportRow> rows;
    for (int n = 1; n <= r.n_max; ++n)
      for (int p = 0; p <= r.pq_max; ++p)
        for (int q = 0; p + q <= r.pq_max; ++q) {
          if (q > 0 && n < 2) continue;
          for (int k = 0; k <= r.k_max; ++k) {
            auto c = monomial_symbol_residual(p, q, k, n);
            rows.push_back(exact_row("symbolic", "monomial_symbol", detail::params_json(c.parameters), c.residual, c.branch));
          }
        }
    return rows;
  });

  // tau and tau' must differ on the non-harmonic symbol z zbar by exactly (lambda / 2) f
  units.push_back([] {
    std::vector<ReportRow> rows;
    for (const Rational lambda : {Rational(1), Rational(-1), Rational(2)}) {
      GaussianPolynomial f(1, lambda, ExactPolynomial::constant(1, ComplexRational(1)));
      ExactPolynomial P = ExactPolynomial::norm_sq(1);
      auto diff = apply_tau_prime(P, lambda, f) - apply_tau(P, lambda, f);
      rows.push_back(exact_row("symbolic", "tau_non_harmonic", {{"lambda", detail::lambda_str(lambda)}},
                               diff - f * ComplexRational(lambda / 2), diff.is_zero() ? "no difference" : "differs"));
    }
    return rows;
  });

  units.push_back([r] {
    std::vector<ReportRow> rows;
    std::mt19937_64 rng(r.seed);
    std::uniform_int_distribution<int> dim(1, r.n_max), e(0, 3);
    const std::vector<Rational> ls{1, -1, 2, -2, Rational(1, 3)};
    for (const auto& lambda : ls)
      for (int t = 0; t < 20; ++t) {
        const int n = dim(rng);
        Monomial m;
        for (int j = 0; j < n; ++j) {
          m.alpha[j] = static_cast<std::uint8_t>(e(rng));
          m.beta[j] = static_cast<std::uint8_t>(e(rng));
        }
        GaussianPolynomial f(n, lambda, ExactPolynomial::term(n, m, ComplexRational(1)));
        for (int j = 0; j < n; ++j)
          rows.push_back(exact_row("symbolic", "commutator",
                                   {{"lambda", detail::lambda_str(lambda)}, {"sample", t}, {"n", n}, {"j", j + 1},
                                    {"f", f.to_string()}},
                                   commutator_residual(j, lambda, f)));
      }
    return rows;
  });

  units.push_back([r] {
    std::vector<ReportRow> rows;
    for (int n = 1; n <= r.n_max; ++n)
      for (int k = 0; k <= r.k_max; ++k) {
        auto c = special_hermite_residual(k, n);
        rows.push_back(exact_row("symbolic", "special_hermite", detail::params_json(c.parameters), c.residual, c.branch));
      }
    return rows;
  });
  return detail::run_units(units, r.threads);
}

// ---------------------------------------------------------------- Laguerre

// Fixture format: {"entries": [{"k": 3, "order": 1, "coefficients": ["4", "-6", "3", "-1/6"]}]}.
inline LaguerreTable load_laguerre_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw precondition_error("cannot open Laguerre table " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw precondition_error("Laguerre table " + path + ": " + e.what());
  }
  LaguerreTable t;
  try {
    for (const auto& e : j.at("entries")) {
      std::vector<Rational> c;
      for (const auto& v : e.at("coefficients")) c.emplace_back(v.get<std::string>());
      for (auto& x : c) x.canonicalize();
      t.set(e.at("k").get<int>(), e.at("order").get<int>(), RationalPoly(c));
    }
  } catch (const json::exception& e) {
    throw precondition_error("Laguerre table " + path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw precondition_error("Laguerre table " + path + ": bad rational coefficient");
  }
  t.mark_overridden();
  return t;
}

struct LaguerreRanges {
  int k_max = 12;
  int order_max = 4;
  int samples = 20;  // generalized recursions at sampled (a, order, x)
  int truncation = 40;
  std::uint64_t seed = 2024;
};

inline std::vector<ReportRow> laguerre_suite(const LaguerreRanges& r, const LaguerreTable& table = {}) {
  require(r.k_max >= 1 && r.order_max >= 0, "invalid Laguerre ranges");
  using detail::numeric_row;
  std::vector<ReportRow> rows;
  const std::string source = table.overridden() ? "table override" : "";
  for (int k = 1; k <= r.k_max; ++k)
    for (int a = 0; a <= r.order_max; ++a) {
      json params = {{"k", k}, {"order", a}};
      ReportRow d{"laguerre", "laguerre_derivative", params, true, derivative_recursion_holds(table, k, a), 0, 0, source};
      d.residual = d.pass ? 0 : 1;
      rows.push_back(d);
      ReportRow s{"laguerre", "laguerre_shift", params, true, shift_recursion_holds(table, k, a), 0, 0, source};
      s.residual = s.pass ? 0 : 1;
      rows.push_back(s);
    }
  // polynomial case of the generalized recursions, exact on coefficients
  for (int k = 1; k <= r.k_max; ++k) {
    json params = {{"a", std::to_string(-k)}, {"order", 2}, {"terms", k + 2}};
    bool dp = derivative_recursion_formal(ComplexRational(-k), 2, k + 2), sp = shift_recursion_formal(ComplexRational(-k), 2, k + 2);
    rows.push_back({"laguerre", "generalized_derivative", params, true, dp, dp ? 0.0 : 1.0, 0, "polynomial, coefficients"});
    rows.push_back({"laguerre", "generalized_shift", params, true, sp, sp ? 0.0 : 1.0, 0, "polynomial, coefficients"});
  }
  std::mt19937_64 rng(r.seed);
  std::uniform_int_distribution<int> num(-12, 5), den(2, 9), ord(0, 3);
  std::uniform_real_distribution<double> xs(0.0, 5.0);
  for (int done = 0; done < r.samples;) {
    ComplexRational a(Rational(num(rng), den(rng)), Rational(num(rng), den(rng)));
    if (!in_c_sharp(a)) continue;
    const int order = ord(rng);
    const double x = xs(rng);
    std::ostringstream as;
    as << a;
    json params = {{"a", as.str()}, {"order", order}, {"x", x}, {"N", r.truncation}};
    auto d = derivative_recursion_residual(a, order, x, r.truncation);
    auto s = shift_recursion_residual(a, order, x, r.truncation);
    rows.push_back(numeric_row("laguerre", "generalized_derivative", params, d.residual, d.tolerance, "series, tail bound"));
    rows.push_back(numeric_row("laguerre", "generalized_shift", params, s.residual, s.tolerance, "series, tail bound"));
    const bool df = derivative_recursion_formal(a, order, r.truncation), sf = shift_recursion_formal(a, order, r.truncation);
    rows.push_back({"laguerre", "generalized_derivative", params, true, df, df ? 0.0 : 1.0, 0, "series, coefficients"});
    rows.push_back({"laguerre", "generalized_shift", params, true, sf, sf ? 0.0 : 1.0, 0, "series, coefficients"});
    ++done;
  }
  return rows;
}

// ---------------------------------------------------------------- harmonics

struct HarmonicRanges {
  int n_max = 3;
  int pq_max = 4;
  int threads = 1;
};

inline std::vector<ReportRow> harmonics_suite(const HarmonicRanges& r) {
  require(r.n_max >= 1 && r.n_max <= kMaxDim && r.pq_max >= 0, "invalid harmonic ranges");
  if (r.pq_max > 8) throw guardrail_error("p+q <= 8 for the harmonics suite");
  std::vector<detail::Unit> units;
  for (int n = 1; n <= r.n_max; ++n)
    for (int p = 0; p <= r.pq_max; ++p)
      for (int q = 0; p + q <= r.pq_max; ++q)
        units.push_back([n, p, q] {
          std::vector<ReportRow> rows;
          auto B = harmonic_basis(n, p, q);
          json params = {{"n", n}, {"p", p}, {"q", q}};
          const long expect = dim_hpq(n, p, q);
          ReportRow d{"harmonics", "harmonic_dimension", params, true, static_cast<long>(B.size()) == expect,
                      std::abs(static_cast<double>(B.size()) - static_cast<double>(expect)), 0,
                      "rank " + std::to_string(B.size())};
          rows.push_back(d);
          std::size_t bad = 0;
          for (const auto& Y : B.elements) bad += laplacian(Y.poly()).size();
          rows.push_back({"harmonics", "harmonic_kernel", params, true, bad == 0, static_cast<double>(bad), 0, ""});
          if (!B.elements.empty()) {
            auto s = sup_norm_bound_check(B.elements.front(), 4000, 1);
            rows.push_back(detail::numeric_row("harmonics", "sup_norm_bound", params, s.sup_estimate / s.bound, 1.0 + 1e-12,
                                               "sup / bound"));
          }
          return rows;
        });
  return detail::run_units(units, r.threads);
}

// ---------------------------------------------------------------- numeric

struct NumericRanges {
  bool orthogonality_only = false;
  int k_max = 5;
  int n_max = 1;
  int probes = 25;
  std::optional<double> tol;  // overrides every per-identity tolerance
  int threads = 0;
  std::uint64_t seed = 17;
};

inline void check_guardrails(const NumericRanges& r, const Guardrails& g = {}) {
  if (r.n_max < 1 || r.n_max > g.numeric_n) throw guardrail_error("numeric suites run for n <= " + std::to_string(g.numeric_n));
  if (r.k_max < 0 || r.k_max > 12) throw guardrail_error("numeric suites run for k <= 12");
  if (r.probes < 1 || r.probes > 400) throw guardrail_error("numeric suites take 1..400 probes");
}

// phi_j x phi_k against (2 pi) delta_jk phi_k on the default n = 1 grid; one row per (j, k).
inline std::vector<ReportRow> orthogonality_rows(const NumericRanges& r) {
  const GridGeometry geo = default_geometry(1);
  const auto probes = default_probes(1, 3.0, r.probes, r.seed);
  const double tol = r.tol.value_or(1e-5);
  std::vector<GridFunction> grids;
  for (int k = 0; k <= r.k_max; ++k) grids.push_back(GridFunction::sample(geo, phi_function(k, 1), "phi"));
  std::vector<ReportRow> rows;
  for (int j = 0; j <= r.k_max; ++j)
    for (int k = 0; k <= r.k_max; ++k) {
      auto v = twisted_convolution(phi_function(j, 1), grids[k], 1.0, probes, {r.threads, 16384});
      double worst = 0;
      for (std::size_t i = 0; i < probes.size(); ++i)
        worst = std::max(worst, std::abs(v[i] - (j == k ? 2 * kPi * eval_phi(k, 1, probes[i]) : 0.0)));
      rows.push_back(detail::numeric_row("numeric", "orthogonality", {{"n", 1}, {"j", j}, {"k", k}, {"probes", r.probes}}, worst,
                                         tol, "max abs over probes"));
    }
  return rows;
}

struct NamedProfile {
  std::string name;
  std::function<double(double)> f;
};

inline std::vector<NamedProfile> radial_test_profiles() {
  return {
      {"e^{-r^2/3}(1+r^2/5)", [](double r) { return std::exp(-r * r / 3) * (1 + r * r / 5); }},
      {"e^{-r^2/2}", [](double r) { return std::exp(-r * r / 2); }},
      {"r^2 e^{-r^2/2.5}", [](double r) { return r * r * std::exp(-r * r / 2.5); }},
      {"phi_2^0", [](double r) { return phi_radial(2, 0.0, r); }},
      {"e^{-r^2}(1-r^2+r^4/4)", [](double r) { return std::exp(-r * r) * (1 - r * r + r * r * r * r / 4); }},
  };
}

inline std::vector<ReportRow> radial_projection_rows(const NumericRanges& r, int k_max = 4) {
  const auto probes = default_probes(1, 2.5, 5, r.seed);
  const double tol = r.tol.value_or(1e-5);
  std::vector<ReportRow> rows;
  for (const auto& prof : radial_test_profiles())
    for (int k = 0; k <= k_max; ++k) {
      auto c = radial_projection_check(prof.f, k, 1, probes, default_geometry(1), {r.threads, 16384});
      json params = {{"n", 1}, {"k", k}, {"f", prof.name}};
      // f orthogonal to phi_k: the right side is zero, so the left side is checked in absolute terms
      if (std::abs(c.coefficient) < 1e-10) {
        double lhs = 0;
        for (const auto& v : c.lhs) lhs = std::max(lhs, std::abs(v));
        rows.push_back(detail::numeric_row("numeric", "radial_projection", params, lhs, r.tol.value_or(1e-6), "orthogonal, absolute"));
      } else {
        rows.push_back(detail::numeric_row("numeric", "radial_projection", params, c.rel_err, tol, "relative"));
      }
    }
  return rows;
}

inline std::vector<ReportRow> hecke_bochner_rows(const NumericRanges& r, int pq_max = 2, int k_max = 3) {
  const auto a = [](double t) { return std::exp(-t * t / 3) * (1 + t * t / 5); };
  const double tol = r.tol.value_or(1e-4), vanish_tol = r.tol.value_or(1e-6);
  std::vector<ReportRow> rows;
  for (int n = 1; n <= r.n_max; ++n) {
    const auto probes = default_probes(n, n == 1 ? 2.0 : 1.2, n == 1 ? 5 : 3, r.seed);
    for (int p = 0; p <= pq_max; ++p)
      for (int q = 0; p + q <= pq_max; ++q) {
        auto B = harmonic_basis(n, p, q);
        if (B.elements.empty()) continue;
        FloatBigraded P = B.elements.front().to_floating();
        for (int k = 0; k <= k_max; ++k) {
          json params = {{"n", n}, {"p", p}, {"q", q}, {"k", k}};
          auto c = hecke_bochner_check(a, P, k, probes, default_geometry(n), {r.threads, 16384});
          if (c.vanishing)
            rows.push_back(detail::numeric_row("numeric", "hecke_bochner", params, c.max_abs_lhs, vanish_tol, "k<p, absolute"));
          else
            rows.push_back(detail::numeric_row("numeric", "hecke_bochner", params, c.rel_err, tol, "relative"));
        }
      }
  }
  return rows;
}

// Calibrated constant: fit residual and scatter across radii and probe sets, plus agreement with the closed form.
inline std::vector<ReportRow> weighted_functional_rows(const NumericRanges& r) {
  const double tol = r.tol.value_or(1e-4);
  std::vector<ReportRow> rows;
  for (auto [n, p, q, k] : std::vector<std::array<int, 4>>{{1, 0, 1, 2}, {1, 2, 0, 1}, {2, 1, 1, 2}, {2, 2, 0, 1}, {2, 0, 1, 3}}) {
    if (n > r.n_max) continue;
    json params = {{"n", n}, {"p", p}, {"q", q}, {"k", k}};
    try {
      auto c = calibrate_constant(k, p, q, n, {0.73, 1.31, 1.87}, 1.0);
      rows.push_back(detail::numeric_row("numeric", "weighted_functional", params, c.max_fit_residual, tol, "fit residual"));
      rows.push_back(detail::numeric_row("numeric", "weighted_functional", params, c.uncertainty, tol, "constant scatter"));
      rows.push_back(detail::numeric_row("numeric", "weighted_functional", params,
                                         std::abs(c.value - c.closed_form) / std::abs(c.closed_form), tol, "closed form"));
    } catch (const calibration_error& e) {
      rows.push_back(detail::numeric_row("numeric", "weighted_functional", params, std::numeric_limits<double>::infinity(), tol,
                                         e.what()));
    }
  }
  return rows;
}

inline std::vector<ReportRow> numeric_suite(const NumericRanges& r) {
  check_guardrails(r);
  std::vector<ReportRow> rows = orthogonality_rows(r);
  if (r.orthogonality_only) return rows;
  for (auto&& part : {radial_projection_rows(r), hecke_bochner_rows(r), weighted_functional_rows(r)})
    rows.insert(rows.end(), part.begin(), part.end());
  return rows;
}

inline double max_residual(const std::vector<ReportRow>& rows, const std::string& identity = {}) {
  double m = 0;
  for (const auto& r : rows)
    if (identity.empty() || r.identity == identity) m = std::max(m, r.residual);
  return m;
}

}  // namespace hbl
