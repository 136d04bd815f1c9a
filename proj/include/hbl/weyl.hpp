#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "hbl/generalized_laguerre.hpp"
#include "hbl/harmonics.hpp"

namespace hbl {

// f(z) = poly(z, zbar) * exp(-|lambda| |z|^2 / 4), kept exactly.
class GaussianPolynomial {
 public:
  GaussianPolynomial(int n, Rational lambda) : GaussianPolynomial(n, std::move(lambda), ExactPolynomial(n)) {}
  GaussianPolynomial(int n, Rational lambda, ExactPolynomial poly)
      : n_(n), lambda_(std::move(lambda)), poly_(std::move(poly)) {
    require(n >= 1 && n <= kMaxDim, "dimension out of range");
    require(sgn(lambda_) != 0, "Gaussian scale must be nonzero");
    require(poly_.dim() == n, "polynomial dimension does not match");
  }

  int dim() const { return n_; }
  const Rational& lambda() const { return lambda_; }
  Rational scale() const { return abs(lambda_); }
  const ExactPolynomial& poly() const { return poly_; }
  bool is_zero() const { return poly_.is_zero(); }

  GaussianPolynomial d_z(int j) const {
    check_index(j);
    return with(poly_.d_z(j) - poly_.times_zbar(j) * ComplexRational(scale() / 4));
  }
  GaussianPolynomial d_zbar(int j) const {
    check_index(j);
    return with(poly_.d_zbar(j) - poly_.times_z(j) * ComplexRational(scale() / 4));
  }
  GaussianPolynomial times_z(int j) const {
    check_index(j);
    return with(poly_.times_z(j));
  }
  GaussianPolynomial times_zbar(int j) const {
    check_index(j);
    return with(poly_.times_zbar(j));
  }
  GaussianPolynomial times(const ExactPolynomial& p) const { return with(poly_ * p); }

  GaussianPolynomial& operator+=(const GaussianPolynomial& o) {
    check_compatible(o);
    poly_ += o.poly_;
    return *this;
  }
  GaussianPolynomial& operator-=(const GaussianPolynomial& o) {
    check_compatible(o);
    poly_ -= o.poly_;
    return *this;
  }
  friend GaussianPolynomial operator+(GaussianPolynomial a, const GaussianPolynomial& b) { return a += b; }
  friend GaussianPolynomial operator-(GaussianPolynomial a, const GaussianPolynomial& b) { return a -= b; }
  friend GaussianPolynomial operator*(const GaussianPolynomial& a, const ComplexRational& s) {
    return a.with(a.poly_ * s);
  }
  friend bool operator==(const GaussianPolynomial& a, const GaussianPolynomial& b) {
    return a.n_ == b.n_ && a.scale() == b.scale() && a.poly_ == b.poly_;
  }

  cplx operator()(const Point& z) const {
    return poly_(z) * std::exp(-scale().get_d() * z.norm_sq() / 4);
  }

  std::string to_string() const { return "(" + poly_.to_string() + ") e^{-" + scale().get_str() + "|z|^2/4}"; }

 private:
  GaussianPolynomial with(ExactPolynomial p) const { return GaussianPolynomial(n_, lambda_, std::move(p)); }
  void check_index(int j) const { require(j >= 0 && j < n_, "coordinate index out of range"); }
  void check_compatible(const GaussianPolynomial& o) const {
    require(o.n_ == n_, "dimension mismatch");
    require(o.scale() == scale(), "Gaussian scale mismatch");
  }

  int n_;
  Rational lambda_;
  ExactPolynomial poly_;
};

namespace detail {
inline void check_operator_scale(const Rational& lambda, const GaussianPolynomial& f) {
  require(sgn(lambda) != 0, "lambda must be nonzero");
  if (abs(lambda) != f.scale()) throw precondition_error("operator scale does not match the Gaussian scale");
}
}  // namespace detail

// W_j = d/dz_j - (lambda/4) zbar_j
inline GaussianPolynomial apply_W(int j, const Rational& lambda, const GaussianPolynomial& f) {
  detail::check_operator_scale(lambda, f);
  return f.d_z(j) - f.times_zbar(j) * ComplexRational(lambda / 4);
}

// W_j^+ = d/dzbar_j + (lambda/4) z_j
inline GaussianPolynomial apply_Wplus(int j, const Rational& lambda, const GaussianPolynomial& f) {
  detail::check_operator_scale(lambda, f);
  return f.d_zbar(j) + f.times_z(j) * ComplexRational(lambda / 4);
}

enum class Generator { W, Wplus };

struct Letter {
  Generator g;
  int j;
};

// Applied right to left: word {a, b} means a(b(f)).
inline GaussianPolynomial apply_word(const std::vector<Letter>& word, const Rational& lambda, GaussianPolynomial f) {
  for (auto it = word.rbegin(); it != word.rend(); ++it)
    f = it->g == Generator::W ? apply_W(it->j, lambda, f) : apply_Wplus(it->j, lambda, f);
  return f;
}

// (W_j^+ (-W_j) - (-W_j) W_j^+) f - (lambda/2) f
inline GaussianPolynomial commutator_residual(int j, const Rational& lambda, const GaussianPolynomial& f) {
  GaussianPolynomial a = apply_Wplus(j, lambda, apply_W(j, lambda, f)) * ComplexRational(-1);
  GaussianPolynomial b = apply_W(j, lambda, apply_Wplus(j, lambda, f));
  return a + b - f * ComplexRational(lambda / 2);
}

// Applies monomial words to a fixed f with memoization. Keys: alpha = W exponents, beta = W^+ exponents.
class WeylApplicator {
 public:
  WeylApplicator(Rational lambda, GaussianPolynomial f) : lambda_(std::move(lambda)), f_(std::move(f)) {
    detail::check_operator_scale(lambda_, f_);
  }

  const GaussianPolynomial& source() const { return f_; }
  const Rational& lambda() const { return lambda_; }

  // (W^+)^beta W^alpha f
  const GaussianPolynomial& wplus_after_w(const Monomial& key) { return word(key, true); }
  // W^alpha (W^+)^beta f
  const GaussianPolynomial& w_after_wplus(const Monomial& key) { return word(key, false); }

  // tau(P) f: z^alpha zbar^beta -> (W^+)^beta W^alpha
  GaussianPolynomial tau(const ExactPolynomial& P) { return combine(P, [&](const Monomial& m) -> auto& { return wplus_after_w(m); }); }
  // tau'(P) f: z^alpha zbar^beta -> W^alpha (W^+)^beta
  GaussianPolynomial tau_prime(const ExactPolynomial& P) {
    return combine(P, [&](const Monomial& m) -> auto& { return w_after_wplus(m); });
  }
  // P(W~) f: z^alpha zbar^beta -> (W^+)^alpha W^beta
  GaussianPolynomial symbol(const ExactPolynomial& P) {
    return combine(P, [&](const Monomial& m) -> auto& { return wplus_after_w(m.swapped()); });
  }

 private:
  template <class F>
  GaussianPolynomial combine(const ExactPolynomial& P, F&& lookup) {
    require(P.dim() == f_.dim(), "symbol dimension does not match the function");
    GaussianPolynomial out(f_.dim(), f_.lambda());
    for (const auto& [m, c] : P.terms()) out += lookup(m) * c;
    return out;
  }

  const GaussianPolynomial& word(const Monomial& key, bool plus_outer) {
    std::lock_guard<std::recursive_mutex> lock(mu_);
    auto& memo = plus_outer ? outer_plus_ : outer_w_;
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const int n = f_.dim();
    GaussianPolynomial value = f_;
    auto& outer = plus_outer ? key.beta : key.alpha;
    auto& inner = plus_outer ? key.alpha : key.beta;
    int jo = -1, ji = -1;
    for (int j = 0; j < n; ++j) {
      if (outer[j] > 0 && jo < 0) jo = j;
      if (inner[j] > 0 && ji < 0) ji = j;
    }
    for (int j = n; j < kMaxDim; ++j)
      require(key.alpha[j] == 0 && key.beta[j] == 0, "word uses a coordinate beyond the dimension");
    if (jo >= 0 || ji >= 0) {
      Monomial prev = key;
      const bool peel_outer = jo >= 0;
      const int j = peel_outer ? jo : ji;
      auto& slot = peel_outer == plus_outer ? prev.beta : prev.alpha;
      slot[j] = static_cast<std::uint8_t>(slot[j] - 1);
      const GaussianPolynomial& base = word(prev, plus_outer);
      const bool use_plus = peel_outer == plus_outer;
      value = use_plus ? apply_Wplus(j, lambda_, base) : apply_W(j, lambda_, base);
    }
    return memo.emplace(key, std::move(value)).first->second;
  }

  Rational lambda_;
  GaussianPolynomial f_;
  std::recursive_mutex mu_;
  std::map<Monomial, GaussianPolynomial> outer_plus_, outer_w_;
};

inline GaussianPolynomial apply_tau(const ExactPolynomial& P, const Rational& lambda, const GaussianPolynomial& f) {
  return WeylApplicator(lambda, f).tau(P);
}
inline GaussianPolynomial apply_tau_prime(const ExactPolynomial& P, const Rational& lambda,
                                          const GaussianPolynomial& f) {
  return WeylApplicator(lambda, f).tau_prime(P);
}
inline GaussianPolynomial apply_symbol(const ExactPolynomial& P, const Rational& lambda, const GaussianPolynomial& f) {
  return WeylApplicator(lambda, f).symbol(P);
}

// sum_s c_s t^s with t = |z|^2 / 2, as a polynomial in (z, zbar).
inline ExactPolynomial t_series(int n, const std::vector<ComplexRational>& c) {
  ExactPolynomial t = ExactPolynomial::norm_sq(n) * ComplexRational(Rational(1, 2));
  ExactPolynomial power = ExactPolynomial::constant(n, ComplexRational(1));
  ExactPolynomial out(n);
  for (std::size_t s = 0; s < c.size(); ++s) {
    if (s > 0) power = power * t;
    if (!c[s].is_zero()) out += power * c[s];
  }
  return out;
}

// phi_k^order(sqrt|lambda| z) = L_k^order(|lambda||z|^2/2) e^{-|lambda||z|^2/4}; for |lambda| = 1 this is the
// usual Laguerre function.
inline GaussianPolynomial phi_gaussian(int k, int order, int n, const Rational& lambda = 1) {
  require(k >= 0 && order >= 0, "invalid Laguerre function parameters");
  RationalPoly L = laguerre_coeffs(k, order);
  Rational s = abs(lambda);
  std::vector<ComplexRational> c;
  Rational sp = 1;
  for (int i = 0; i <= L.degree(); ++i) {
    c.emplace_back(L[i] * sp);
    sp *= s;
  }
  return GaussianPolynomial(n, lambda, t_series(n, c));
}

struct IdentityCheck {
  std::string identity;
  std::vector<std::pair<std::string, std::string>> parameters;
  GaussianPolynomial residual;
  std::string branch;  // which side of a case split was exercised
  bool pass() const { return residual.is_zero(); }
};

inline ExactPolynomial monomial_symbol(int n, int p, int q) {
  require(p >= 0 && q >= 0, "degrees must be nonnegative");
  require(q == 0 || n >= 2, "the zbar_2 factor needs n >= 2");
  Monomial m;
  m.alpha[0] = static_cast<std::uint8_t>(p);
  if (q > 0) m.beta[1] = static_cast<std::uint8_t>(q);
  return ExactPolynomial::term(n, m, ComplexRational(1));
}

inline ComplexRational neg_two_power(int e) { return ComplexRational(rational_pow(Rational(-2), -e)); }

// (W_1^+)^p W_2^q phi_k^{n-1} against (-2)^{-p-q} z_1^p zbar_2^q phi_{k-p}^{n+p+q-1}, zero when k < p; lambda = 1.
inline IdentityCheck monomial_symbol_residual(int p, int q, int k, int n) {
  require(k >= 0 && n >= 1 && n <= kMaxDim, "invalid identity parameters");
  ExactPolynomial P = monomial_symbol(n, p, q);
  GaussianPolynomial lhs = apply_symbol(P, 1, phi_gaussian(k, n - 1, n));
  GaussianPolynomial rhs(n, 1);
  if (k >= p) rhs = phi_gaussian(k - p, n + p + q - 1, n).times(P) * neg_two_power(p + q);
  return {"monomial_symbol",
          {{"p", std::to_string(p)}, {"q", std::to_string(q)}, {"k", std::to_string(k)}, {"n", std::to_string(n)}},
          lhs - rhs,
          k >= p ? "k>=p" : "k<p"};
}

enum class BranchConvention {
  consistent,  // (-2)^{-p-q}; lambda = 1 drops p, lambda = -1 drops q
  literal,     // (-2 lambda)^{-p-q}; lambda < 0 drops p, lambda > 0 drops q
};

inline const char* to_string(BranchConvention c) { return c == BranchConvention::consistent ? "consistent" : "literal"; }

struct BranchRule {
  int drop;
  ComplexRational factor;
};

inline BranchRule branch_rule(BranchConvention c, int p, int q, const Rational& lambda) {
  if (c == BranchConvention::consistent) return {sgn(lambda) > 0 ? p : q, neg_two_power(p + q)};
  return {sgn(lambda) < 0 ? p : q, ComplexRational(rational_pow(-2 * lambda, -(p + q)))};
}

struct HarmonicSymbolCheck {
  IdentityCheck check;
  BranchConvention convention;
  bool other_convention_pass;
};

// P(W~) phi_k^{n-1} against factor * P phi_{k-drop}^{n+p+q-1} for harmonic P and lambda = +-1.
inline HarmonicSymbolCheck harmonic_symbol_residual(const BigradedPolynomial& P, int k, const Rational& lambda,
                                                    BranchConvention convention = BranchConvention::consistent,
                                                    WeylApplicator* shared = nullptr) {
  require(k >= 0, "k must be nonnegative");
  require(abs(lambda) == 1, "identity checks run for lambda = +1 or -1");
  if (!laplacian(P).is_zero()) throw precondition_error("symbol is not harmonic");
  const int n = P.dim(), p = P.p(), q = P.q();
  std::unique_ptr<WeylApplicator> own;
  if (!shared) {
    own = std::make_unique<WeylApplicator>(lambda, phi_gaussian(k, n - 1, n, lambda));
    shared = own.get();
  }
  require(shared->lambda() == lambda, "shared applicator has a different lambda");
  GaussianPolynomial lhs = shared->symbol(P.poly());
  auto residual_for = [&](BranchConvention c) {
    BranchRule rule = branch_rule(c, p, q, lambda);
    GaussianPolynomial rhs(n, lambda);
    if (k >= rule.drop) rhs = phi_gaussian(k - rule.drop, n + p + q - 1, n, lambda).times(P.poly()) * rule.factor;
    return std::make_pair(lhs - rhs, k >= rule.drop);
  };
  auto [res, active] = residual_for(convention);
  auto other = convention == BranchConvention::consistent ? BranchConvention::literal : BranchConvention::consistent;
  bool other_pass = residual_for(other).first.is_zero();
  BranchRule rule = branch_rule(convention, p, q, lambda);
  std::string branch = std::string(sgn(lambda) > 0 ? "lambda>0" : "lambda<0") + ", drop " +
                       (rule.drop == p && rule.drop != q ? "p" : rule.drop == q && rule.drop != p ? "q" : "p=q") +
                       (active ? "" : ", vanishing");
  return {{"harmonic_symbol",
           {{"n", std::to_string(n)},
            {"p", std::to_string(p)},
            {"q", std::to_string(q)},
            {"k", std::to_string(k)},
            {"lambda", lambda.get_str()},
            {"convention", to_string(convention)}},
           res,
           branch},
          convention,
          other_pass};
}

// (-Delta + |z|^2/4 - (2k + n + shift)) phi_k^{n-1}, Delta = 4 sum d_j dbar_j.
inline IdentityCheck special_hermite_residual(int k, int n, int shift = 0) {
  GaussianPolynomial f = phi_gaussian(k, n - 1, n);
  GaussianPolynomial lap(n, 1);
  for (int j = 0; j < n; ++j) lap += f.d_zbar(j).d_z(j);
  GaussianPolynomial r = f.times(ExactPolynomial::norm_sq(n)) * ComplexRational(Rational(1, 4)) -
                         lap * ComplexRational(4) - f * ComplexRational(2 * k + n + shift);
  return {"special_hermite",
          {{"k", std::to_string(k)}, {"n", std::to_string(n)}, {"shift", std::to_string(shift)}},
          r,
          "eigenvalue " + std::to_string(2 * k + n + shift)};
}

struct FormalCheck {
  int safe_order;                 // t-orders 0..safe_order compared
  std::size_t tracked_terms;      // monomials compared
  std::size_t nonzero_residuals;  // among tracked monomials
  Rational max_residual_norm;     // max |coefficient|^2 of the residual
  bool pass() const { return nonzero_residuals == 0; }
};

// Formal t-series version of the monomial identity for phi_a^{n-1} = M_a^{n-1}(t) e^{-t/2}, lambda = 1.
// The series keeps t^0 .. t^{N-1}; orders s <= N - 1 - p - q of the right side are unaffected by truncation.
inline FormalCheck generalized_symbol_residual(const ComplexRational& a, int p, int q, int n, int N) {
  require(n >= 1 && n <= kMaxDim, "dimension out of range");
  if (N < p + q + 4) throw precondition_error("truncation too small for the requested degrees");
  const bool integer = a.is_real() && a.re().get_den() == 1 && sgn(a.re()) <= 0;
  if (!integer && !in_c_sharp(a)) throw precondition_error("generalized Laguerre degree outside C_sharp");
  ExactPolynomial P = monomial_symbol(n, p, q);

  auto left_spec = GeneralizedLaguerreSpec::series(a, n - 1, N - 1);
  GaussianPolynomial f(n, 1, t_series(n, left_spec.coefficients()));
  GaussianPolynomial lhs = apply_symbol(P, 1, f);

  GaussianPolynomial rhs(n, 1);
  const bool vanishes = integer && a.re() + p > 0;  // k < p
  if (!vanishes) {
    auto right_spec = GeneralizedLaguerreSpec::series(a + ComplexRational(p), n + p + q - 1, N - 1);
    rhs = GaussianPolynomial(n, 1, t_series(n, right_spec.coefficients())).times(P) * neg_two_power(p + q);
  }
  GaussianPolynomial res = lhs - rhs;

  FormalCheck out{N - 1 - p - q, 0, 0, 0};
  const int max_degree = p + q + 2 * out.safe_order;
  std::map<Monomial, bool> seen;
  for (const auto& [m, c] : res.poly().terms()) {
    if (m.degree() > max_degree) continue;
    ++out.nonzero_residuals;
    out.max_residual_norm = std::max(out.max_residual_norm, c.norm());
  }
  for (const auto* g : {&lhs, &rhs})
    for (const auto& [m, c] : g->poly().terms())
      if (m.degree() <= max_degree) seen[m] = true;
  out.tracked_terms = seen.size();
  return out;
}

// Rotation of a Gaussian polynomial: (pi(sigma) f)(z) = f(sigma^{-1} z); the Gaussian factor is invariant.
inline GaussianPolynomial rotate(const SquareMatrix<ComplexRational>& sigma, const GaussianPolynomial& f) {
  require_unitary(sigma, f.dim());
  return GaussianPolynomial(f.dim(), f.lambda(), substitute_unitary(sigma, f.poly()));
}

// tau(pi(conj sigma) P) phi_k - pi(sigma)(tau(P) phi_k). W_j transforms like zbar_j under unitary changes, so the
// symbol must be rotated by the conjugate matrix.
inline GaussianPolynomial tau_equivariance_residual(const SquareMatrix<ComplexRational>& sigma, const ExactPolynomial& P,
                                                    int k, const Rational& lambda) {
  const int n = P.dim();
  require_unitary(sigma, n);
  WeylApplicator app(lambda, phi_gaussian(k, n - 1, n, lambda));
  GaussianPolynomial left = app.tau(substitute_unitary(conjugate_matrix(sigma), P));
  GaussianPolynomial right = rotate(sigma, app.tau(P));
  return left - right;
}

}  // namespace hbl
