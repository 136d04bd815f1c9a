#pragma once

#include <map>
#include <optional>

#include "hbl/polynomial.hpp"
#include "hbl/univariate.hpp"

namespace hbl {

// Identifies L_k^order, phi_k^order and the scaled phi_{k,lambda}.
struct LaguerreSpec {
  int k = 0;
  Rational order = 0;
  Rational scale = 1;

  LaguerreSpec(int degree, Rational ord, Rational lambda = 1) : k(degree), order(std::move(ord)), scale(std::move(lambda)) {
    require(k >= 0, "Laguerre degree must be nonnegative");
    require(sgn(scale) != 0, "Laguerre scale must be nonzero");
  }
  int scale_sign() const { return sgn(scale); }
};

// Coefficient of x^i is (-1)^i binom(order+k, k-i) / i!.
inline RationalPoly laguerre_coeffs(int k, const Rational& order) {
  require(k >= 0, "Laguerre degree must be nonnegative");
  std::vector<Rational> c(k + 1);
  for (int i = 0; i <= k; ++i) {
    Rational b = 1;
    for (int m = 1; m <= k - i; ++m) b *= (order + i + m) / Rational(m);
    c[i] = b / factorial(i);
    if (i % 2) c[i] = -c[i];
  }
  return RationalPoly(std::move(c));
}

inline RationalPoly laguerre_coeffs(const LaguerreSpec& s) { return laguerre_coeffs(s.k, s.order); }

// L_k^alpha(x) by the three-term recurrence.
inline double laguerre_eval(int k, double alpha, double x) {
  require(k >= 0, "Laguerre degree must be nonnegative");
  double l0 = 1.0;
  if (k == 0) return l0;
  double l1 = 1.0 + alpha - x;
  for (int j = 2; j <= k; ++j) {
    double l2 = ((2.0 * j - 1.0 + alpha - x) * l1 - (j - 1.0 + alpha) * l0) / j;
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

// phi_k^alpha as a function of the radius r = |z|.
inline double phi_radial(int k, double alpha, double r) {
  const double r2 = r * r;
  return laguerre_eval(k, alpha, r2 / 2) * std::exp(-r2 / 4);
}

inline double eval_phi(int k, int n, const Point& z) {
  require(n >= 1 && z.n == n, "dimension mismatch");
  const double r2 = z.norm_sq();
  return laguerre_eval(k, n - 1.0, r2 / 2) * std::exp(-r2 / 4);
}

inline double eval_phi_scaled(int k, int n, const Rational& lambda, const Point& z) {
  if (sgn(lambda) == 0) throw precondition_error("scale lambda must be nonzero");
  return eval_phi(k, n, z * std::abs(lambda.get_d()));
}

// ||phi_k^{gamma-1}||^2 with respect to r^{2 gamma - 1} dr on (0, inf): 2^{gamma-1} (k+gamma-1)! / k!.
inline Rational phi_norm_sq(int k, int gamma) {
  require(k >= 0 && gamma >= 1, "phi_norm_sq needs k >= 0, gamma >= 1");
  return rational_pow(2, gamma - 1) * factorial(k + gamma - 1) / factorial(k);
}

// B_k^n = k! (n-1)! / (n+k-1)!
inline Rational radial_projection_constant(int k, int n) {
  require(k >= 0 && n >= 1, "invalid (k, n)");
  return factorial(k) * factorial(n - 1) / factorial(n + k - 1);
}

// Coefficient lists keyed by (k, integer order); entries can be overridden to exercise the checks.
class LaguerreTable {
 public:
  const RationalPoly& get(int k, int order) const {
    auto key = std::pair{k, order};
    auto it = entries_.find(key);
    if (it == entries_.end()) it = entries_.emplace(key, laguerre_coeffs(k, order)).first;
    return it->second;
  }
  void set(int k, int order, RationalPoly p) { entries_[{k, order}] = std::move(p); }
  bool overridden() const { return overridden_; }
  void mark_overridden() { overridden_ = true; }

 private:
  mutable std::map<std::pair<int, int>, RationalPoly> entries_;
  bool overridden_ = false;
};

// d/dx L_k^a = -L_{k-1}^{a+1}
inline bool derivative_recursion_holds(const LaguerreTable& t, int k, int order) {
  require(k >= 1, "derivative recursion needs k >= 1");
  return t.get(k, order).derivative() == t.get(k - 1, order + 1) * Rational(-1);
}

// L_{k-1}^{a+1} + L_k^a = L_k^{a+1}
inline bool shift_recursion_holds(const LaguerreTable& t, int k, int order) {
  require(k >= 1, "shift recursion needs k >= 1");
  return t.get(k - 1, order + 1) + t.get(k, order) == t.get(k, order + 1);
}

struct CoincidenceCandidate {
  RootInterval first;
  RootInterval second;
};

struct ZeroScan {
  int k1 = 0, k2 = 0;
  Rational order;
  std::vector<RootInterval> roots1, roots2;
  std::vector<CoincidenceCandidate> candidates;
  int gcd_degree = 0;  // exact certificate: degree of gcd(L_k1, L_k2)
};

// Caches isolating intervals of L_k^order on [0, X] so that many pairs can be scanned.
class LaguerreZeroScanner {
 public:
  LaguerreZeroScanner(Rational order, Rational x_max, Rational resolution)
      : order_(std::move(order)), x_max_(std::move(x_max)), resolution_(std::move(resolution)) {
    require(sgn(x_max_) > 0 && sgn(resolution_) > 0, "scan interval and resolution must be positive");
  }

  const std::vector<RootInterval>& roots(int k) {
    auto it = roots_.find(k);
    if (it == roots_.end()) {
      RationalPoly p = laguerre_coeffs(k, order_);
      it = roots_.emplace(k, p.degree() > 0 ? isolate_roots(p, 0, x_max_, x_max_) : std::vector<RootInterval>{}).first;
    }
    return it->second;
  }

  ZeroScan scan(int k1, int k2) {
    require(k1 != k2, "common zero scan needs distinct degrees");
    ZeroScan out;
    out.k1 = k1;
    out.k2 = k2;
    out.order = order_;
    RationalPoly p1 = laguerre_coeffs(k1, order_), p2 = laguerre_coeffs(k2, order_);
    out.gcd_degree = std::max(gcd(p1, p2).degree(), 0);
    auto& r1 = mutable_roots(k1);
    auto& r2 = mutable_roots(k2);
    for (auto& a : r1)
      for (auto& b : r2) {
        while (a.overlaps(b)) {
          bool fine_a = a.exact || a.width() < resolution_;
          bool fine_b = b.exact || b.width() < resolution_;
          if (fine_a && fine_b) break;
          if (!fine_a && (fine_b || a.width() >= b.width()))
            bisect_root(p1, a);
          else
            bisect_root(p2, b);
        }
        if (a.overlaps(b)) out.candidates.push_back({a, b});
      }
    out.roots1 = r1;
    out.roots2 = r2;
    return out;
  }

 private:
  std::vector<RootInterval>& mutable_roots(int k) {
    roots(k);
    return roots_.at(k);
  }

  Rational order_, x_max_, resolution_;
  std::map<int, std::vector<RootInterval>> roots_;
};

inline ZeroScan common_zero_scan(int k1, int k2, const Rational& order, const Rational& x_max,
                                 const Rational& resolution) {
  LaguerreZeroScanner s(order, x_max, resolution);
  return s.scan(k1, k2);
}

}  // namespace hbl
