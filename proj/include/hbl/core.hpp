#pragma once

#include <gmpxx.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace hbl {

using Rational = mpq_class;
using Integer = mpz_class;
using cplx = std::complex<double>;

inline constexpr int kMaxDim = 4;
inline constexpr double kPi = std::numbers::pi;

// Error taxonomy shared by every module.
struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct truncation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct calibration_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct guardrail_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct hypothesis_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw precondition_error(what);
}

// Complex number with exact rational parts.
class ComplexRational {
 public:
  ComplexRational() = default;
  ComplexRational(long v) : re_(v) {}  // NOLINT(implicit)
  ComplexRational(Rational re) : re_(std::move(re)) {}  // NOLINT(implicit)
  ComplexRational(Rational re, Rational im) : re_(std::move(re)), im_(std::move(im)) {}

  const Rational& re() const { return re_; }
  const Rational& im() const { return im_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
  bool is_real() const { return sgn(im_) == 0; }

  ComplexRational conj() const { return {re_, -im_}; }
  Rational norm() const { return re_ * re_ + im_ * im_; }
  cplx to_complex() const { return {re_.get_d(), im_.get_d()}; }

  ComplexRational& operator+=(const ComplexRational& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  ComplexRational& operator-=(const ComplexRational& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  ComplexRational& operator*=(const ComplexRational& o) {
    Rational r = re_ * o.re_ - im_ * o.im_;
    Rational i = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
  }
  ComplexRational& operator/=(const ComplexRational& o) {
    if (o.is_zero()) throw domain_error("division by zero");
    Rational d = o.norm();
    *this *= o.conj();
    re_ /= d;
    im_ /= d;
    return *this;
  }
  ComplexRational operator-() const { return {-re_, -im_}; }

  friend ComplexRational operator+(ComplexRational a, const ComplexRational& b) { return a += b; }
  friend ComplexRational operator-(ComplexRational a, const ComplexRational& b) { return a -= b; }
  friend ComplexRational operator*(ComplexRational a, const ComplexRational& b) { return a *= b; }
  friend ComplexRational operator/(ComplexRational a, const ComplexRational& b) { return a /= b; }
  friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }
  friend std::ostream& operator<<(std::ostream& os, const ComplexRational& c) {
    os << c.re_;
    if (sgn(c.im_) != 0) os << (sgn(c.im_) > 0 ? "+" : "-") << abs(c.im_) << "i";
    return os;
  }

  static ComplexRational i() { return {0, 1}; }

 private:
  Rational re_{0};
  Rational im_{0};
};

inline Rational factorial(long n) {
  require(n >= 0, "factorial of a negative integer");
  Integer r;
  mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
  return Rational(r);
}

// binom(top, m) = prod_{j=1}^{m} (top - m + j) / j for rational top.
inline Rational binomial(const Rational& top, long m) {
  if (m < 0) return 0;
  Rational r = 1;
  for (long j = 1; j <= m; ++j) r *= (top - m + j) / Rational(j);
  return r;
}

inline Rational rational_pow(const Rational& x, long e) {
  if (e < 0) {
    if (sgn(x) == 0) throw domain_error("zero to a negative power");
    return Rational(1) / rational_pow(x, -e);
  }
  Rational r = 1;
  for (long i = 0; i < e; ++i) r *= x;
  return r;
}

// Exact conversion of a finite double.
inline Rational to_rational(double x) {
  if (!std::isfinite(x)) throw data_error("non-finite value cannot be made exact");
  return Rational(x);
}

inline double factorial_d(int n) { return std::tgamma(n + 1.0); }

// |S^{2n-1}| = 2 pi^n / (n-1)!
inline double sphere_area(int n) { return 2.0 * std::pow(kPi, n) / factorial_d(n - 1); }

struct Point {
  int n = 1;
  std::array<cplx, kMaxDim> z{};

  Point() = default;
  explicit Point(int dim) : n(dim) { require(dim >= 1 && dim <= kMaxDim, "dimension out of range"); }
  Point(std::initializer_list<cplx> coords) : n(static_cast<int>(coords.size())) {
    require(n >= 1 && n <= kMaxDim, "dimension out of range");
    int i = 0;
    for (const auto& c : coords) z[i++] = c;
  }

  cplx& operator[](int j) { return z[j]; }
  const cplx& operator[](int j) const { return z[j]; }

  double norm_sq() const {
    double s = 0;
    for (int j = 0; j < n; ++j) s += std::norm(z[j]);
    return s;
  }
  double norm() const { return std::sqrt(norm_sq()); }

  Point operator-(const Point& o) const {
    Point r(n);
    for (int j = 0; j < n; ++j) r.z[j] = z[j] - o.z[j];
    return r;
  }
  Point operator+(const Point& o) const {
    Point r(n);
    for (int j = 0; j < n; ++j) r.z[j] = z[j] + o.z[j];
    return r;
  }
  Point operator*(double s) const {
    Point r(n);
    for (int j = 0; j < n; ++j) r.z[j] = z[j] * s;
    return r;
  }
  Point operator*(cplx s) const {
    Point r(n);
    for (int j = 0; j < n; ++j) r.z[j] = z[j] * s;
    return r;
  }
};

// Im(z . conj(w)) summed over coordinates.
inline double symplectic(const Point& z, const Point& w) {
  double s = 0;
  for (int j = 0; j < z.n; ++j) s += (z.z[j] * std::conj(w.z[j])).imag();
  return s;
}

}  // namespace hbl
