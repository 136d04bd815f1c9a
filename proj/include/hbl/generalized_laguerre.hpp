#pragma once

#include <limits>

#include "hbl/laguerre.hpp"

namespace hbl {

// a in C_sharp: -a is not a nonnegative integer and Re(a) < 1.
inline bool in_c_sharp(const ComplexRational& a) {
  if (a.re() >= 1) return false;
  if (!a.is_real()) return true;
  const Rational& r = a.re();
  return !(r.get_den() == 1 && sgn(r) <= 0);
}

// M_a^order = c(a) * 1F1(a; order+1; x), c(a) = prod_{m=1}^{order} (m - a) / order!, so M_{-k}^order = L_k^order.
struct GeneralizedLaguerreSpec {
  ComplexRational a;
  int order = 0;
  int truncation = 1;
  bool integer_degree = false;

  static GeneralizedLaguerreSpec make(ComplexRational a, int order, int truncation) {
    if (!in_c_sharp(a)) throw precondition_error("generalized Laguerre degree outside C_sharp");
    return series(std::move(a), order, truncation);
  }
  // Polynomial case a = -k, bypassing the C_sharp check explicitly.
  static GeneralizedLaguerreSpec polynomial(int k, int order, int truncation) {
    require(k >= 0, "degree must be nonnegative");
    GeneralizedLaguerreSpec s = series(ComplexRational(-k), order, truncation);
    s.integer_degree = true;
    return s;
  }
  // The series is entire for every a once order >= 0; used for shifted companions in identities.
  static GeneralizedLaguerreSpec series(ComplexRational a, int order, int truncation) {
    require(order >= 0, "generalized Laguerre order must be a nonnegative integer");
    require(truncation >= 1, "truncation must be positive");
    GeneralizedLaguerreSpec s;
    s.a = std::move(a);
    s.order = order;
    s.truncation = truncation;
    return s;
  }

  ComplexRational normalization() const {
    ComplexRational c = 1;
    for (int m = 1; m <= order; ++m) c *= ComplexRational(m) - a;
    return c / ComplexRational(factorial(order));
  }

  // Pochhammer values a_0 .. a_count-1.
  std::vector<ComplexRational> pochhammer(int count) const {
    std::vector<ComplexRational> p(count);
    if (count > 0) p[0] = 1;
    for (int s = 1; s < count; ++s) p[s] = p[s - 1] * (a + ComplexRational(s - 1));
    return p;
  }

  // Power-series coefficients c_0 .. c_N of the first representation.
  std::vector<ComplexRational> coefficients() const {
    std::vector<ComplexRational> c(truncation + 1);
    ComplexRational term = normalization();
    for (int s = 0; s <= truncation; ++s) {
      c[s] = term;
      term *= (a + ComplexRational(s)) / ComplexRational(Rational((order + 1 + s) * (s + 1)));
    }
    return c;
  }

  bool terminates_before_truncation() const {
    return integer_degree && -a.re() < truncation;
  }

  double abs_a() const { return std::abs(a.to_complex()) * (1 + 1e-15); }
};

struct SeriesValue {
  cplx value;
  double tail_bound = 0;  // truncation tail plus a summation rounding estimate
};

enum class Representation { first, second };

namespace detail {

// sum_{s<N} t_s where t_s = coef_s x^s, tail <= |t_N| / (1 - rho).
inline SeriesValue sum_with_tail(const std::vector<cplx>& coef, double x, double rho, bool exact_zero_tail) {
  const int N = static_cast<int>(coef.size()) - 1;
  cplx s = 0;
  double mag = 0, xp = 1;
  for (int i = 0; i < N; ++i) {
    cplx t = coef[i] * xp;
    s += t;
    mag += std::abs(t);
    xp *= x;
  }
  double tail = 0;
  if (!exact_zero_tail) {
    if (rho >= 1) throw truncation_error("insufficient truncation: tail ratio bound " + std::to_string(rho) + " >= 1");
    tail = std::abs(coef[N]) * xp / (1 - rho);
  }
  tail += 4 * std::numeric_limits<double>::epsilon() * (N + 1) * mag;
  return {s, tail};
}

}  // namespace detail

inline SeriesValue eval_M(const GeneralizedLaguerreSpec& spec, double x, Representation rep = Representation::first) {
  require(x >= 0, "generalized Laguerre evaluated at negative x");
  const int N = spec.truncation;
  const double b = spec.order + 1.0;
  if (rep == Representation::first) {
    auto exact = spec.coefficients();
    std::vector<cplx> c(exact.size());
    for (std::size_t i = 0; i < exact.size(); ++i) c[i] = exact[i].to_complex();
    double rho = x * std::max(1.0, (spec.abs_a() + N) / (b + N)) / (N + 1);
    return detail::sum_with_tail(c, x, rho, spec.terminates_before_truncation());
  }
  // c(a) e^x sum_i (b-a)_i (-x)^i / ((b)_i i!)
  ComplexRational ba = ComplexRational(spec.order + 1) - spec.a;
  std::vector<cplx> c(N + 1);
  ComplexRational term = spec.normalization();
  for (int i = 0; i <= N; ++i) {
    c[i] = term.to_complex();
    term *= (ba + ComplexRational(i)) * ComplexRational(-1) / ComplexRational(Rational((spec.order + 1 + i) * (i + 1)));
  }
  double rho = x * std::max(1.0, (std::abs(ba.to_complex()) + N) / (b + N)) / (N + 1);
  SeriesValue v = detail::sum_with_tail(c, x, rho, false);
  const double ex = std::exp(x);
  return {v.value * ex, v.tail_bound * ex};
}

// Termwise derivative in x of the first representation.
inline SeriesValue eval_M_derivative(const GeneralizedLaguerreSpec& spec, double x) {
  require(x >= 0, "generalized Laguerre evaluated at negative x");
  const int N = spec.truncation;
  auto exact = spec.coefficients();
  std::vector<cplx> c(N);
  for (int s = 0; s < N; ++s) c[s] = exact[s + 1].to_complex() * double(s + 1);
  // the derivative sums N-1 terms; its term ratio bound uses shifted parameters
  const int Nd = N - 1;
  double rho = x * std::max(1.0, (spec.abs_a() + 1 + Nd) / (spec.order + 2.0 + Nd)) / (Nd + 1);
  bool zero_tail = spec.integer_degree && -spec.a.re() < Nd + 1;
  return detail::sum_with_tail(c, x, rho, zero_tail);
}

struct RecursionResidual {
  double residual = 0;
  double tolerance = 0;
  bool pass() const { return residual <= tolerance; }
};

// d/dx M_a^order + M_{a+1}^{order+1}
inline RecursionResidual derivative_recursion_residual(const ComplexRational& a, int order, double x, int N) {
  auto base = GeneralizedLaguerreSpec::series(a, order, N);
  auto up = GeneralizedLaguerreSpec::series(a + ComplexRational(1), order + 1, N);
  SeriesValue d = eval_M_derivative(base, x), u = eval_M(up, x);
  return {std::abs(d.value + u.value), d.tail_bound + u.tail_bound};
}

// M_{a+1}^{order+1} + M_a^order - M_a^{order+1}
inline RecursionResidual shift_recursion_residual(const ComplexRational& a, int order, double x, int N) {
  SeriesValue s1 = eval_M(GeneralizedLaguerreSpec::series(a + ComplexRational(1), order + 1, N), x);
  SeriesValue s2 = eval_M(GeneralizedLaguerreSpec::series(a, order, N), x);
  SeriesValue s3 = eval_M(GeneralizedLaguerreSpec::series(a, order + 1, N), x);
  return {std::abs(s1.value + s2.value - s3.value), s1.tail_bound + s2.tail_bound + s3.tail_bound};
}

// The same identity with the degree shifted the other way, M_{a-1}^{order+1}; nonzero in this convention.
inline RecursionResidual opposite_shift_residual(const ComplexRational& a, int order, double x, int N) {
  SeriesValue s1 = eval_M(GeneralizedLaguerreSpec::series(a - ComplexRational(1), order + 1, N), x);
  SeriesValue s2 = eval_M(GeneralizedLaguerreSpec::series(a, order, N), x);
  SeriesValue s3 = eval_M(GeneralizedLaguerreSpec::series(a, order + 1, N), x);
  return {std::abs(s1.value + s2.value - s3.value), s1.tail_bound + s2.tail_bound + s3.tail_bound};
}

// Exact coefficient-level versions of the two recursions up to index N-1.
inline bool derivative_recursion_formal(const ComplexRational& a, int order, int N) {
  auto c = GeneralizedLaguerreSpec::series(a, order, N).coefficients();
  auto u = GeneralizedLaguerreSpec::series(a + ComplexRational(1), order + 1, N).coefficients();
  for (int s = 0; s < N; ++s)
    if (!(c[s + 1] * ComplexRational(s + 1) + u[s]).is_zero()) return false;
  return true;
}

inline bool shift_recursion_formal(const ComplexRational& a, int order, int N) {
  auto c1 = GeneralizedLaguerreSpec::series(a + ComplexRational(1), order + 1, N).coefficients();
  auto c2 = GeneralizedLaguerreSpec::series(a, order, N).coefficients();
  auto c3 = GeneralizedLaguerreSpec::series(a, order + 1, N).coefficients();
  for (int s = 0; s <= N; ++s)
    if (!(c1[s] + c2[s] - c3[s]).is_zero()) return false;
  return true;
}

}  // namespace hbl
