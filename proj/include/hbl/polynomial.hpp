#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <sstream>
#include <vector>

#include "hbl/core.hpp"

namespace hbl {

// Exponent pair (alpha, beta) for z^alpha zbar^beta.
struct Monomial {
  std::array<std::uint8_t, kMaxDim> alpha{};
  std::array<std::uint8_t, kMaxDim> beta{};

  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;

  int deg_z() const {
    int s = 0;
    for (auto a : alpha) s += a;
    return s;
  }
  int deg_zbar() const {
    int s = 0;
    for (auto b : beta) s += b;
    return s;
  }
  int degree() const { return deg_z() + deg_zbar(); }
  bool is_one() const { return deg_z() == 0 && deg_zbar() == 0; }

  // alpha! beta!
  Rational factorial_weight() const {
    Rational w = 1;
    for (int j = 0; j < kMaxDim; ++j) w *= factorial(alpha[j]) * factorial(beta[j]);
    return w;
  }

  Monomial swapped() const { return Monomial{beta, alpha}; }

  static Monomial of(std::initializer_list<int> a, std::initializer_list<int> b) {
    Monomial m;
    int j = 0;
    for (int v : a) m.alpha[j++] = static_cast<std::uint8_t>(v);
    j = 0;
    for (int v : b) m.beta[j++] = static_cast<std::uint8_t>(v);
    return m;
  }
};

template <class C>
struct CoeffTraits;

template <>
struct CoeffTraits<ComplexRational> {
  static constexpr bool exact = true;
  static bool is_zero(const ComplexRational& c) { return c.is_zero(); }
  static ComplexRational conj(const ComplexRational& c) { return c.conj(); }
  static cplx to_complex(const ComplexRational& c) { return c.to_complex(); }
  static ComplexRational from_rational(const Rational& r) { return ComplexRational(r); }
  static double magnitude(const ComplexRational& c) { return std::abs(c.to_complex()); }
};

template <>
struct CoeffTraits<cplx> {
  static constexpr bool exact = false;
  static bool is_zero(const cplx& c) { return c == cplx(0.0); }
  static cplx conj(const cplx& c) { return std::conj(c); }
  static cplx to_complex(const cplx& c) { return c; }
  static cplx from_rational(const Rational& r) { return {r.get_d(), 0.0}; }
  static double magnitude(const cplx& c) { return std::abs(c); }
};

// Sparse polynomial in (z, zbar) on C^n.
template <class C>
class Polynomial {
 public:
  using Traits = CoeffTraits<C>;
  using TermMap = std::map<Monomial, C>;

  Polynomial() = default;
  explicit Polynomial(int n) : n_(n) { require(n >= 1 && n <= kMaxDim, "dimension out of range"); }

  static Polynomial constant(int n, const C& c) {
    Polynomial p(n);
    p.add_term(Monomial{}, c);
    return p;
  }
  static Polynomial term(int n, const Monomial& m, const C& c) {
    Polynomial p(n);
    p.add_term(m, c);
    return p;
  }
  static Polynomial z(int n, int j) {
    Monomial m;
    m.alpha[j] = 1;
    return term(n, m, C(1));
  }
  static Polynomial zbar(int n, int j) {
    Monomial m;
    m.beta[j] = 1;
    return term(n, m, C(1));
  }
  // sum_j z_j zbar_j = |z|^2
  static Polynomial norm_sq(int n) {
    Polynomial p(n);
    for (int j = 0; j < n; ++j) {
      Monomial m;
      m.alpha[j] = 1;
      m.beta[j] = 1;
      p.add_term(m, C(1));
    }
    return p;
  }

  int dim() const { return n_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const TermMap& terms() const { return terms_; }

  C coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? C(0) : it->second;
  }

  void add_term(const Monomial& m, const C& c) {
    check_monomial(m);
    if (Traits::is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (Traits::is_zero(it->second)) terms_.erase(it);
    }
  }

  int total_degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }
  bool is_bihomogeneous(int p, int q) const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [&](const auto& t) { return t.first.deg_z() == p && t.first.deg_zbar() == q; });
  }

  Polynomial& operator+=(const Polynomial& o) {
    adopt_dim(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    adopt_dim(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(const C& s) {
    if (Traits::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }
  Polynomial operator-() const {
    Polynomial r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const C& s) { return a *= s; }
  friend Polynomial operator*(const C& s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    require(a.n_ == b.n_, "dimension mismatch in product");
    Polynomial r(a.n_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m;
        for (int j = 0; j < kMaxDim; ++j) {
          m.alpha[j] = static_cast<std::uint8_t>(ma.alpha[j] + mb.alpha[j]);
          m.beta[j] = static_cast<std::uint8_t>(ma.beta[j] + mb.beta[j]);
        }
        r.add_term(m, ca * cb);
      }
    return r;
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

  Polynomial d_z(int j) const {
    Polynomial r(n_);
    for (const auto& [m, c] : terms_) {
      if (m.alpha[j] == 0) continue;
      Monomial d = m;
      --d.alpha[j];
      r.add_term(d, c * C(static_cast<long>(m.alpha[j])));
    }
    return r;
  }
  Polynomial d_zbar(int j) const {
    Polynomial r(n_);
    for (const auto& [m, c] : terms_) {
      if (m.beta[j] == 0) continue;
      Monomial d = m;
      --d.beta[j];
      r.add_term(d, c * C(static_cast<long>(m.beta[j])));
    }
    return r;
  }
  Polynomial times_z(int j) const {
    Polynomial r(n_);
    for (const auto& [m, c] : terms_) {
      Monomial d = m;
      ++d.alpha[j];
      r.terms_.emplace(d, c);
    }
    return r;
  }
  Polynomial times_zbar(int j) const {
    Polynomial r(n_);
    for (const auto& [m, c] : terms_) {
      Monomial d = m;
      ++d.beta[j];
      r.terms_.emplace(d, c);
    }
    return r;
  }

  // Complex conjugate as a function: conj(c) zbar^alpha z^beta.
  Polynomial conj() const {
    Polynomial r(n_);
    for (const auto& [m, c] : terms_) r.terms_.emplace(m.swapped(), Traits::conj(c));
    return r;
  }

  cplx operator()(const Point& p) const {
    require(p.n == n_, "evaluation point dimension mismatch");
    int dmax = std::max(total_degree(), 0);
    std::array<std::vector<cplx>, kMaxDim> zp, zbp;
    for (int j = 0; j < n_; ++j) {
      zp[j].assign(dmax + 1, 1.0);
      zbp[j].assign(dmax + 1, 1.0);
      for (int e = 1; e <= dmax; ++e) {
        zp[j][e] = zp[j][e - 1] * p.z[j];
        zbp[j][e] = zbp[j][e - 1] * std::conj(p.z[j]);
      }
    }
    cplx s = 0;
    for (const auto& [m, c] : terms_) {
      cplx v = Traits::to_complex(c);
      for (int j = 0; j < n_; ++j) v *= zp[j][m.alpha[j]] * zbp[j][m.beta[j]];
      s += v;
    }
    return s;
  }

  double max_abs_coefficient() const {
    double r = 0;
    for (const auto& [m, c] : terms_) r = std::max(r, Traits::magnitude(c));
    return r;
  }

  Polynomial<cplx> to_floating() const {
    Polynomial<cplx> r(n_);
    for (const auto& [m, c] : terms_) r.add_term(m, Traits::to_complex(c));
    return r;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << "(" << c << ")";
      for (int j = 0; j < n_; ++j) {
        if (m.alpha[j]) os << "*z" << j + 1 << (m.alpha[j] > 1 ? "^" + std::to_string(m.alpha[j]) : "");
        if (m.beta[j]) os << "*zb" << j + 1 << (m.beta[j] > 1 ? "^" + std::to_string(m.beta[j]) : "");
      }
    }
    return os.str();
  }

 private:
  void check_monomial(const Monomial& m) const {
    for (int j = n_; j < kMaxDim; ++j)
      if (m.alpha[j] || m.beta[j]) throw precondition_error("monomial uses a variable beyond the dimension");
  }
  void adopt_dim(const Polynomial& o) {
    if (terms_.empty() && o.n_ != n_ && o.n_ > n_) n_ = o.n_;
    require(o.n_ == n_ || o.terms_.empty(), "dimension mismatch in sum");
  }

  int n_ = 1;
  TermMap terms_;
};

using ExactPolynomial = Polynomial<ComplexRational>;
using FloatPolynomial = Polynomial<cplx>;

// All multi-indices of length n with |alpha| = d, in lexicographically decreasing order.
inline std::vector<std::array<std::uint8_t, kMaxDim>> multi_indices(int n, int d) {
  std::vector<std::array<std::uint8_t, kMaxDim>> out;
  std::array<std::uint8_t, kMaxDim> cur{};
  auto rec = [&](auto&& self, int j, int left) -> void {
    if (j == n - 1) {
      cur[j] = static_cast<std::uint8_t>(left);
      out.push_back(cur);
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur[j] = static_cast<std::uint8_t>(v);
      self(self, j + 1, left - v);
    }
    cur[j] = 0;
  };
  rec(rec, 0, d);
  return out;
}

// Pre-expanded form for fast repeated floating evaluation.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  template <class C>
  explicit CompiledPolynomial(const Polynomial<C>& p) : n_(p.dim()), degree_(std::max(p.total_degree(), 0)) {
    for (const auto& [m, c] : p.terms()) terms_.push_back({m, CoeffTraits<C>::to_complex(c)});
  }

  cplx operator()(const Point& p) const {
    if (terms_.empty()) return 0.0;
    std::array<std::array<cplx, 33>, kMaxDim> zp, zbp;
    require(degree_ <= 32, "compiled polynomial degree too large");
    for (int j = 0; j < n_; ++j) {
      zp[j][0] = zbp[j][0] = 1.0;
      cplx zc = std::conj(p.z[j]);
      for (int e = 1; e <= degree_; ++e) {
        zp[j][e] = zp[j][e - 1] * p.z[j];
        zbp[j][e] = zbp[j][e - 1] * zc;
      }
    }
    cplx s = 0;
    for (const auto& t : terms_) {
      cplx v = t.coeff;
      for (int j = 0; j < n_; ++j) v *= zp[j][t.m.alpha[j]] * zbp[j][t.m.beta[j]];
      s += v;
    }
    return s;
  }

  bool empty() const { return terms_.empty(); }

 private:
  struct Term {
    Monomial m;
    cplx coeff;
  };
  int n_ = 1;
  int degree_ = 0;
  std::vector<Term> terms_;
};

}  // namespace hbl
