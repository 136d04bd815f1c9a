#pragma once

#include <optional>
#include <vector>

#include "hbl/core.hpp"

namespace hbl {

// Dense univariate polynomial over Q; coeffs[i] multiplies x^i.
class RationalPoly {
 public:
  RationalPoly() = default;
  explicit RationalPoly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<Rational>& coeffs() const { return c_; }
  const Rational& operator[](std::size_t i) const { return c_[i]; }
  Rational leading() const { return c_.empty() ? Rational(0) : c_.back(); }

  Rational operator()(const Rational& x) const {
    Rational s = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * x + *it;
    return s;
  }
  double eval(double x) const {
    double s = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * x + it->get_d();
    return s;
  }

  RationalPoly derivative() const {
    std::vector<Rational> d;
    for (std::size_t i = 1; i < c_.size(); ++i) d.push_back(c_[i] * static_cast<long>(i));
    return RationalPoly(std::move(d));
  }

  friend RationalPoly operator+(const RationalPoly& a, const RationalPoly& b) {
    std::vector<Rational> r(std::max(a.c_.size(), b.c_.size()), Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) r[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) r[i] += b.c_[i];
    return RationalPoly(std::move(r));
  }
  friend RationalPoly operator-(const RationalPoly& a, const RationalPoly& b) {
    std::vector<Rational> r(std::max(a.c_.size(), b.c_.size()), Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) r[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) r[i] -= b.c_[i];
    return RationalPoly(std::move(r));
  }
  friend RationalPoly operator*(const RationalPoly& a, const Rational& s) {
    std::vector<Rational> r = a.c_;
    for (auto& v : r) v *= s;
    return RationalPoly(std::move(r));
  }
  friend bool operator==(const RationalPoly& a, const RationalPoly& b) { return a.c_ == b.c_; }

  // Euclidean remainder of a by b.
  friend RationalPoly rem(RationalPoly a, const RationalPoly& b) {
    require(!b.is_zero(), "division by the zero polynomial");
    const int db = b.degree();
    while (!a.is_zero() && a.degree() >= db) {
      Rational f = a.leading() / b.leading();
      int shift = a.degree() - db;
      for (int i = 0; i <= db; ++i) a.c_[shift + i] -= f * b.c_[i];
      a.c_.back() = 0;
      a.trim();
    }
    return a;
  }

  friend RationalPoly gcd(RationalPoly a, RationalPoly b) {
    while (!b.is_zero()) {
      RationalPoly r = rem(a, b);
      a = std::move(b);
      b = std::move(r);
    }
    if (!a.is_zero()) a = a * (Rational(1) / a.leading());
    return a;
  }

  // Same polynomial scaled by a positive rational so the largest |coefficient| is 1.
  RationalPoly normalized_positive() const {
    if (c_.empty()) return *this;
    Rational m = 0;
    for (const auto& v : c_) m = std::max(m, Rational(abs(v)));
    return *this * (Rational(1) / m);
  }

 private:
  void trim() {
    while (!c_.empty() && sgn(c_.back()) == 0) c_.pop_back();
  }
  std::vector<Rational> c_;
};

struct RootInterval {
  Rational lo;
  Rational hi;
  bool exact = false;  // lo == hi is an exact root

  Rational width() const { return hi - lo; }
  double mid() const { return Rational((lo + hi) / 2).get_d(); }
  bool overlaps(const RootInterval& o) const { return !(hi < o.lo || o.hi < lo); }
};

// Sturm chain of a squarefree polynomial.
class SturmChain {
 public:
  explicit SturmChain(const RationalPoly& p) {
    require(!p.is_zero(), "Sturm chain of the zero polynomial");
    RationalPoly g = gcd(p, p.derivative());
    poly_ = g.degree() > 0 ? squarefree_part(p, g) : p;
    chain_.push_back(poly_.normalized_positive());
    RationalPoly d = poly_.derivative();
    if (d.is_zero()) return;
    chain_.push_back(d.normalized_positive());
    while (true) {
      RationalPoly r = rem(chain_[chain_.size() - 2], chain_.back());
      if (r.is_zero()) break;
      chain_.push_back((r * Rational(-1)).normalized_positive());
    }
  }

  const RationalPoly& poly() const { return poly_; }

  int variations(const Rational& x) const {
    int v = 0, last = 0;
    for (const auto& q : chain_) {
      int s = sgn(q(x));
      if (s == 0) continue;
      if (last != 0 && s != last) ++v;
      last = s;
    }
    return v;
  }

  // Number of distinct roots in (a, b].
  int count(const Rational& a, const Rational& b) const { return variations(a) - variations(b); }

 private:
  static RationalPoly squarefree_part(const RationalPoly& p, const RationalPoly& g) {
    // exact division p / g
    std::vector<Rational> num = p.coeffs();
    const auto& den = g.coeffs();
    int dq = p.degree() - g.degree();
    std::vector<Rational> q(dq + 1, Rational(0));
    for (int i = dq; i >= 0; --i) {
      q[i] = num[i + g.degree()] / den.back();
      for (int j = 0; j <= g.degree(); ++j) num[i + j] -= q[i] * den[j];
    }
    return RationalPoly(std::move(q));
  }

  RationalPoly poly_;
  std::vector<RationalPoly> chain_;
};

// Isolate every real root of p in [lo, hi] into disjoint intervals of width <= max_width.
inline std::vector<RootInterval> isolate_roots(const RationalPoly& p, const Rational& lo, const Rational& hi,
                                               const Rational& max_width) {
  require(lo <= hi, "empty isolation interval");
  SturmChain chain(p);
  const RationalPoly& f = chain.poly();
  std::vector<RootInterval> out;
  if (f.degree() <= 0) return out;
  if (sgn(f(lo)) == 0) out.push_back({lo, lo, true});

  // roots in (a, b] with count c
  auto rec = [&](auto&& self, const Rational& a, const Rational& b, int c) -> void {
    if (c == 0) return;
    if (c == 1 && b - a <= max_width) {
      if (sgn(f(b)) == 0)
        out.push_back({b, b, true});
      else
        out.push_back({a, b, false});
      return;
    }
    Rational m = (a + b) / 2;
    int left = chain.count(a, m);
    self(self, a, m, left);
    self(self, m, b, c - left);
  };
  rec(rec, lo, hi, chain.count(lo, hi));
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.lo < y.lo; });
  return out;
}

// Halve an isolating interval of a simple root of f.
inline void bisect_root(const RationalPoly& f, RootInterval& iv) {
  if (iv.exact) return;
  Rational m = (iv.lo + iv.hi) / 2;
  int sm = sgn(f(m));
  if (sm == 0) {
    iv = {m, m, true};
    return;
  }
  int shi = sgn(f(iv.hi));
  if (shi == 0) {
    iv = {iv.hi, iv.hi, true};
    return;
  }
  if (sm == shi)
    iv.hi = m;
  else
    iv.lo = m;
}

}  // namespace hbl
