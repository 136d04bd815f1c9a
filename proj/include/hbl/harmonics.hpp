#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>

#include "hbl/polynomial.hpp"
#include "hbl/sphere.hpp"

namespace hbl {

// Element of P_{p,q}: every monomial has |alpha| = p and |beta| = q.
template <class C>
class BasicBigraded {
 public:
  BasicBigraded() = default;
  BasicBigraded(int n, int p, int q) : n_(n), p_(p), q_(q), poly_(n) {
    require(p >= 0 && q >= 0, "bidegree must be nonnegative");
  }
  BasicBigraded(int n, int p, int q, Polynomial<C> poly) : BasicBigraded(n, p, q) {
    require(poly.dim() == n || poly.is_zero(), "dimension mismatch");
    if (!poly.is_bihomogeneous(p, q)) throw precondition_error("polynomial is not of the stated bidegree");
    poly_ = std::move(poly);
  }
  // Infers the bidegree from the first term.
  static BasicBigraded from_polynomial(Polynomial<C> poly) {
    require(!poly.is_zero(), "cannot infer bidegree of the zero polynomial");
    const Monomial& m = poly.terms().begin()->first;
    return BasicBigraded(poly.dim(), m.deg_z(), m.deg_zbar(), std::move(poly));
  }

  int dim() const { return n_; }
  int p() const { return p_; }
  int q() const { return q_; }
  const Polynomial<C>& poly() const { return poly_; }
  bool is_zero() const { return poly_.is_zero(); }

  void add_term(const Monomial& m, const C& c) {
    if (m.deg_z() != p_ || m.deg_zbar() != q_) throw precondition_error("term has the wrong bidegree");
    poly_.add_term(m, c);
  }

  cplx operator()(const Point& z) const { return poly_(z); }

  BasicBigraded conj() const { return BasicBigraded(n_, q_, p_, poly_.conj()); }
  BasicBigraded operator*(const C& s) const { return BasicBigraded(n_, p_, q_, poly_ * s); }
  BasicBigraded operator+(const BasicBigraded& o) const {
    require(o.n_ == n_ && o.p_ == p_ && o.q_ == q_, "bidegree mismatch in sum");
    return BasicBigraded(n_, p_, q_, poly_ + o.poly_);
  }
  BasicBigraded operator-(const BasicBigraded& o) const { return *this + o * C(-1); }
  friend bool operator==(const BasicBigraded& a, const BasicBigraded& b) {
    return a.n_ == b.n_ && a.p_ == b.p_ && a.q_ == b.q_ && a.poly_ == b.poly_;
  }

  BasicBigraded<cplx> to_floating() const { return BasicBigraded<cplx>(n_, p_, q_, poly_.to_floating()); }

 private:
  int n_ = 1, p_ = 0, q_ = 0;
  Polynomial<C> poly_;
};

using BigradedPolynomial = BasicBigraded<ComplexRational>;
using FloatBigraded = BasicBigraded<cplx>;

template <class C>
Polynomial<C> laplacian(const Polynomial<C>& P) {
  Polynomial<C> r(P.dim());
  for (int j = 0; j < P.dim(); ++j) r += P.d_z(j).d_zbar(j);
  return r * C(4);
}

// Delta = 4 sum_j d^2 / dz_j dzbar_j, bidegree (p-1, q-1); the zero polynomial when p or q is 0.
template <class C>
BasicBigraded<C> laplacian(const BasicBigraded<C>& P) {
  if (P.p() == 0 || P.q() == 0) return BasicBigraded<C>(P.dim(), std::max(P.p() - 1, 0), std::max(P.q() - 1, 0));
  return BasicBigraded<C>(P.dim(), P.p() - 1, P.q() - 1, laplacian(P.poly()));
}

// sum c conj(d) alpha! beta!
inline ComplexRational fischer_inner(const ExactPolynomial& P, const ExactPolynomial& Q) {
  ComplexRational s = 0;
  for (const auto& [m, c] : P.terms()) {
    auto it = Q.terms().find(m);
    if (it != Q.terms().end()) s += c * it->second.conj() * ComplexRational(m.factorial_weight());
  }
  return s;
}

// Returns sum |c|^2 alpha! beta! (the squared coefficient norm).
inline Rational sphere_l2_norm(const BigradedPolynomial& P) {
  Rational s = 0;
  for (const auto& [m, c] : P.poly().terms()) s += c.norm() * m.factorial_weight();
  return s;
}

inline double sphere_l2_norm(const FloatBigraded& P) {
  double s = 0;
  for (const auto& [m, c] : P.poly().terms()) s += std::norm(c) * m.factorial_weight().get_d();
  return s;
}

// For harmonic P: mean of |P|^2 over the unit sphere with normalized measure,
// sphere_l2_norm(P) (n-1)! / (n+p+q-1)!.
template <class C>
auto normalized_sphere_mean_square(const BasicBigraded<C>& P) {
  auto f = sphere_l2_norm(P);
  Rational conv = factorial(P.dim() - 1) / factorial(P.dim() + P.p() + P.q() - 1);
  if constexpr (std::is_same_v<C, cplx>)
    return f * conv.get_d();
  else
    return Rational(f * conv);
}

inline long dim_ppq(int n, int p, int q) {
  return binomial(p + n - 1, p).get_num().get_si() * binomial(q + n - 1, q).get_num().get_si();
}

// dim H_{p,q}(C^n): (p+q+n-1)(p+n-2)!(q+n-2)! / (p! q! (n-1)! (n-2)!), and for n = 1: 1 iff p q = 0.
inline long dim_hpq(int n, int p, int q) {
  require(n >= 1 && p >= 0 && q >= 0, "invalid (n, p, q)");
  if (n == 1) return p * q == 0 ? 1 : 0;
  Rational d = Rational(p + q + n - 1) * factorial(p + n - 2) * factorial(q + n - 2) /
               (factorial(p) * factorial(q) * factorial(n - 1) * factorial(n - 2));
  return d.get_num().get_si();
}

struct HarmonicBounds {
  int max_n = 4;
  int max_degree = 8;
};

struct HarmonicBasis {
  int n = 1, p = 0, q = 0;
  std::vector<BigradedPolynomial> elements;
  std::vector<std::vector<ComplexRational>> gram;  // fischer_inner(e_i, e_j)
  std::size_t kernel_rank = 0;                      // nullity of Delta: P_{p,q} -> P_{p-1,q-1}

  std::size_t size() const { return elements.size(); }
};

namespace detail {

using Weight = std::array<int, kMaxDim>;

inline Weight weight_of(const Monomial& m) {
  Weight w{};
  for (int j = 0; j < kMaxDim; ++j) w[j] = int(m.alpha[j]) - int(m.beta[j]);
  return w;
}

// Null space of a dense rational matrix (rows x cols), one vector per free column.
inline std::vector<std::vector<Rational>> null_space(std::vector<std::vector<Rational>> A, std::size_t cols) {
  const std::size_t rows = A.size();
  std::vector<int> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && sgn(A[piv][c]) == 0) ++piv;
    if (piv == rows) continue;
    std::swap(A[piv], A[r]);
    Rational inv = 1 / A[r][c];
    for (auto& v : A[r]) v *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || sgn(A[i][c]) == 0) continue;
      Rational f = A[i][c];
      for (std::size_t k = c; k < cols; ++k) A[i][k] -= f * A[r][k];
    }
    pivot_col.push_back(static_cast<int>(c));
    ++r;
  }
  std::vector<bool> is_pivot(cols, false);
  for (int c : pivot_col) is_pivot[c] = true;
  std::vector<std::vector<Rational>> out;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rational> v(cols, Rational(0));
    v[f] = 1;
    for (std::size_t i = 0; i < pivot_col.size(); ++i) v[pivot_col[i]] = -A[i][f];
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

// Exact basis of H_{p,q}: null space of the Laplacian, computed block-wise on the weight
// alpha - beta (which Delta preserves), then Gram-Schmidt under the Fischer product.
inline HarmonicBasis harmonic_basis(int n, int p, int q, const HarmonicBounds& bounds = {}) {
  require(n >= 1 && p >= 0 && q >= 0, "invalid (n, p, q)");
  if (n > bounds.max_n || p + q > bounds.max_degree)
    throw guardrail_error("harmonic basis request (n=" + std::to_string(n) + ", p+q=" + std::to_string(p + q) +
                          ") exceeds configured bounds");
  HarmonicBasis B;
  B.n = n;
  B.p = p;
  B.q = q;
  std::map<detail::Weight, std::vector<Monomial>> blocks;
  for (const auto& a : multi_indices(n, p))
    for (const auto& b : multi_indices(n, q)) {
      Monomial m{a, b};
      blocks[detail::weight_of(m)].push_back(m);
    }
  for (const auto& [w, cols] : blocks) {
    std::vector<std::vector<Rational>> kernel;
    if (p == 0 || q == 0) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        std::vector<Rational> v(cols.size(), Rational(0));
        v[c] = 1;
        kernel.push_back(std::move(v));
      }
    } else {
      std::map<Monomial, std::size_t> row_index;
      std::vector<std::vector<Rational>> A;
      for (std::size_t c = 0; c < cols.size(); ++c)
        for (int j = 0; j < n; ++j) {
          const Monomial& m = cols[c];
          if (!m.alpha[j] || !m.beta[j]) continue;
          Monomial t = m;
          --t.alpha[j];
          --t.beta[j];
          auto [it, fresh] = row_index.try_emplace(t, A.size());
          if (fresh) A.emplace_back(cols.size(), Rational(0));
          A[it->second][c] += 4 * m.alpha[j] * m.beta[j];
        }
      kernel = detail::null_space(std::move(A), cols.size());
    }
    // Gram-Schmidt within the block; blocks are mutually orthogonal.
    std::vector<BigradedPolynomial> done;
    std::vector<Rational> norms;
    for (const auto& v : kernel) {
      BigradedPolynomial P(n, p, q);
      for (std::size_t c = 0; c < cols.size(); ++c)
        if (sgn(v[c]) != 0) P.add_term(cols[c], ComplexRational(v[c]));
      for (std::size_t i = 0; i < done.size(); ++i) {
        ComplexRational proj = fischer_inner(P.poly(), done[i].poly()) / ComplexRational(norms[i]);
        P = P - done[i] * proj;
      }
      norms.push_back(sphere_l2_norm(P));
      done.push_back(P);
    }
    B.elements.insert(B.elements.end(), done.begin(), done.end());
  }
  B.kernel_rank = B.elements.size();
  const std::size_t d = B.elements.size();
  B.gram.assign(d, std::vector<ComplexRational>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) B.gram[i][j] = fischer_inner(B.elements[i].poly(), B.elements[j].poly());
  return B;
}

// Thread-safe memo of exact bases keyed by (n, p, q).
class HarmonicBasisCache {
 public:
  explicit HarmonicBasisCache(HarmonicBounds bounds = {}) : bounds_(bounds) {}

  std::shared_ptr<const HarmonicBasis> get(int n, int p, int q) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::array<int, 3>{n, p, q};
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_.emplace(key, std::make_shared<const HarmonicBasis>(harmonic_basis(n, p, q, bounds_))).first;
    return it->second;
  }

 private:
  HarmonicBounds bounds_;
  std::mutex mu_;
  std::map<std::array<int, 3>, std::shared_ptr<const HarmonicBasis>> cache_;
};

struct SupNormCheck {
  double sup_estimate = 0;
  double bound = 0;             // sqrt(d(p,q) * sphere_l2_norm(P))
  double normalized_bound = 0;  // sqrt(d(p,q)) times the normalized-measure L2 norm
  std::size_t samples = 0;
  bool pass = false;
};

template <class C>
SupNormCheck sup_norm_bound_check(const BasicBigraded<C>& P, int samples = 20000, std::uint64_t seed = 1) {
  if (P.is_zero()) throw precondition_error("sup norm check needs a nonzero polynomial");
  SupNormCheck r;
  CompiledPolynomial f(P.poly());
  auto scan = [&](const SphereRule& rule) {
    for (const auto& z : rule.nodes) r.sup_estimate = std::max(r.sup_estimate, std::abs(f(z)));
    r.samples += rule.size();
  };
  scan(random_sphere_points(P.dim(), samples, seed));
  if (P.dim() <= 2) scan(make_sphere_rule(P.dim(), {64, 48}));
  const double d = static_cast<double>(dim_hpq(P.dim(), P.p(), P.q()));
  double fischer, normalized;
  if constexpr (std::is_same_v<C, cplx>) {
    fischer = sphere_l2_norm(P);
    normalized = normalized_sphere_mean_square(P);
  } else {
    fischer = sphere_l2_norm(P).get_d();
    normalized = normalized_sphere_mean_square(P).get_d();
  }
  r.bound = std::sqrt(d * fischer);
  r.normalized_bound = std::sqrt(d * normalized);
  r.pass = r.sup_estimate <= r.bound * (1 + 1e-12);
  return r;
}

template <class C>
using SquareMatrix = std::vector<std::vector<C>>;

template <class C>
void require_unitary(const SquareMatrix<C>& sigma, int n, double tol = 1e-12) {
  using T = CoeffTraits<C>;
  require(static_cast<int>(sigma.size()) == n, "matrix size does not match dimension");
  for (int i = 0; i < n; ++i) {
    require(static_cast<int>(sigma[i].size()) == n, "matrix is not square");
    for (int j = 0; j < n; ++j) {
      C s(0);
      for (int k = 0; k < n; ++k) s += sigma[i][k] * T::conj(sigma[j][k]);
      C target(i == j ? 1 : 0);
      bool ok;
      if constexpr (T::exact)
        ok = s == target;
      else
        ok = std::abs(s - target) <= tol;
      if (!ok) throw precondition_error("rotation matrix is not unitary");
    }
  }
}

template <class C>
SquareMatrix<C> conjugate_matrix(const SquareMatrix<C>& sigma) {
  SquareMatrix<C> r = sigma;
  for (auto& row : r)
    for (auto& v : row) v = CoeffTraits<C>::conj(v);
  return r;
}

// z -> P(sigma^{-1} z) for any polynomial in (z, zbar); sigma assumed unitary.
template <class C>
Polynomial<C> substitute_unitary(const SquareMatrix<C>& sigma, const Polynomial<C>& P) {
  using T = CoeffTraits<C>;
  const int n = P.dim();
  // (sigma^{-1} z)_j = sum_k conj(sigma_kj) z_k
  std::vector<Polynomial<C>> lin(n, Polynomial<C>(n)), lin_bar(n, Polynomial<C>(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      lin[j] += Polynomial<C>::z(n, k) * T::conj(sigma[k][j]);
      lin_bar[j] += Polynomial<C>::zbar(n, k) * sigma[k][j];
    }
  Polynomial<C> out(n);
  for (const auto& [m, c] : P.terms()) {
    Polynomial<C> t = Polynomial<C>::constant(n, c);
    for (int j = 0; j < n; ++j) {
      for (int e = 0; e < m.alpha[j]; ++e) t = t * lin[j];
      for (int e = 0; e < m.beta[j]; ++e) t = t * lin_bar[j];
    }
    out += t;
  }
  if constexpr (!T::exact) {
    Polynomial<C> cleaned(n);
    const double scale = std::max(out.max_abs_coefficient(), 1.0);
    for (const auto& [m, c] : out.terms())
      if (std::abs(c) > 1e-15 * scale) cleaned.add_term(m, c);
    out = cleaned;
  }
  return out;
}

// pi(sigma) P (z) = P(sigma^{-1} z) with sigma unitary.
template <class C>
BasicBigraded<C> rotate_polynomial(const SquareMatrix<C>& sigma, const BasicBigraded<C>& P, double tol = 1e-12) {
  require_unitary(sigma, P.dim(), tol);
  return BasicBigraded<C>(P.dim(), P.p(), P.q(), substitute_unitary(sigma, P.poly()));
}

// a_j(rho) = <f(rho .), Y_j> / ||Y_j||^2 on the normalized sphere, for each radius; result[j][i].
template <class F>
std::vector<std::vector<cplx>> sph_coefficients(const F& f, const HarmonicBasis& basis, const std::vector<double>& radii,
                                                const SphereRule& rule) {
  require(rule.n == basis.n, "sphere rule dimension mismatch");
  std::vector<std::vector<cplx>> table(basis.size(), std::vector<cplx>(radii.size()));
  std::vector<std::vector<cplx>> ybar(basis.size(), std::vector<cplx>(rule.size()));
  std::vector<double> norm2(basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    CompiledPolynomial y(basis.elements[j].poly());
    for (std::size_t i = 0; i < rule.size(); ++i) ybar[j][i] = std::conj(y(rule.nodes[i])) * rule.weights[i];
    norm2[j] = normalized_sphere_mean_square(basis.elements[j]).get_d();
  }
  std::vector<cplx> samples(rule.size());
  for (std::size_t r = 0; r < radii.size(); ++r) {
    for (std::size_t i = 0; i < rule.size(); ++i) {
      samples[i] = f(rule.nodes[i] * radii[r]);
      if (!std::isfinite(samples[i].real()) || !std::isfinite(samples[i].imag()))
        throw data_error("non-finite sample in spherical coefficient quadrature");
    }
    for (std::size_t j = 0; j < basis.size(); ++j) {
      cplx s = 0;
      for (std::size_t i = 0; i < rule.size(); ++i) s += samples[i] * ybar[j][i];
      table[j][r] = s / norm2[j];
    }
  }
  return table;
}

inline nlohmann::json basis_to_json(const HarmonicBasis& B) {
  nlohmann::json elems = nlohmann::json::array();
  for (const auto& e : B.elements) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [m, c] : e.poly().terms()) {
      std::vector<int> a(m.alpha.begin(), m.alpha.begin() + B.n), b(m.beta.begin(), m.beta.begin() + B.n);
      terms.push_back({{"alpha", a},
                       {"beta", b},
                       {"re_num", c.re().get_num().get_str()},
                       {"re_den", c.re().get_den().get_str()},
                       {"im_num", c.im().get_num().get_str()},
                       {"im_den", c.im().get_den().get_str()}});
    }
    elems.push_back(terms);
  }
  return {{"n", B.n}, {"p", B.p}, {"q", B.q}, {"elements", elems}};
}

inline HarmonicBasis basis_from_json(const nlohmann::json& j) {
  HarmonicBasis B;
  B.n = j.at("n").get<int>();
  B.p = j.at("p").get<int>();
  B.q = j.at("q").get<int>();
  for (const auto& terms : j.at("elements")) {
    BigradedPolynomial P(B.n, B.p, B.q);
    for (const auto& t : terms) {
      Monomial m;
      auto a = t.at("alpha").get<std::vector<int>>(), b = t.at("beta").get<std::vector<int>>();
      require(static_cast<int>(a.size()) == B.n && static_cast<int>(b.size()) == B.n, "multi-index length mismatch");
      for (int k = 0; k < B.n; ++k) {
        m.alpha[k] = static_cast<std::uint8_t>(a[k]);
        m.beta[k] = static_cast<std::uint8_t>(b[k]);
      }
      Rational re(Integer(t.at("re_num").get<std::string>()), Integer(t.at("re_den").get<std::string>()));
      Rational im(Integer(t.at("im_num").get<std::string>()), Integer(t.at("im_den").get<std::string>()));
      re.canonicalize();
      im.canonicalize();
      P.add_term(m, ComplexRational(re, im));
    }
    B.elements.push_back(std::move(P));
  }
  B.kernel_rank = B.elements.size();
  const std::size_t d = B.elements.size();
  B.gram.assign(d, std::vector<ComplexRational>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) B.gram[i][k] = fischer_inner(B.elements[i].poly(), B.elements[k].poly());
  return B;
}

}  // namespace hbl
