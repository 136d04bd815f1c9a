#pragma once

#include <Eigen/Dense>
#include <map>
#include <set>

#include "hbl/twisted.hpp"

namespace hbl {

// f(z) = sum_i a_i(|z|) P_i(z) with each P_i harmonic of bidegree (p_i, q_i).
struct TypeTerm {
  std::function<double(double)> profile;
  FloatBigraded P;
};

class TypeMixture {
 public:
  TypeMixture() = default;
  TypeMixture(int n, std::string label) : n_(n), label_(std::move(label)) {}

  TypeMixture& add(std::function<double(double)> profile, FloatBigraded P) {
    require(P.dim() == n_, "type term dimension mismatch");
    if (laplacian(P.poly()).max_abs_coefficient() > 1e-12 * std::max(P.poly().max_abs_coefficient(), 1.0))
      throw precondition_error("type term polynomial is not harmonic");
    compiled_.emplace_back(P.poly());
    terms_.push_back({std::move(profile), std::move(P)});
    return *this;
  }

  int dim() const { return n_; }
  const std::string& label() const { return label_; }
  const std::vector<TypeTerm>& terms() const { return terms_; }
  bool radial() const {
    for (const auto& t : terms_)
      if (t.P.p() + t.P.q() > 0) return false;
    return true;
  }

  cplx operator()(const Point& z) const {
    const double r = z.norm();
    cplx s = 0;
    for (std::size_t i = 0; i < terms_.size(); ++i) s += terms_[i].profile(r) * compiled_[i](z);
    return s;
  }
  PointFunction function() const {
    return [self = *this](const Point& z) { return self(z); };
  }

 private:
  int n_ = 1;
  std::string label_;
  std::vector<TypeTerm> terms_;
  std::vector<CompiledPolynomial> compiled_;
};

// A radial function with cached inner products int f phi_m^alpha r^power dr.
class RadialProfile {
 public:
  RadialProfile(std::string tag, std::function<double(double)> f, RadialRule rule = {})
      : tag_(std::move(tag)), f_(std::move(f)), rule_(rule), nodes_(rule.build()), fine_(rule.refined().build()) {}

  const std::string& tag() const { return tag_; }
  double operator()(double r) const { return f_(r); }

  double inner(int m, double alpha, int power) const {
    std::lock_guard<std::mutex> lock(*mu_);
    auto key = std::make_tuple(m, alpha, power);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto F = [&](double r) { return f_(r) * phi_radial(m, alpha, r); };
    const double coarse = radial_integral(F, power, nodes_), fine = radial_integral(F, power, fine_);
    const double scale = std::max(radial_integral([&](double r) { return std::abs(F(r)); }, power, fine_), 1e-300);
    if (std::abs(coarse - fine) > 1e-10 * scale)
      throw truncation_error("radial profile '" + tag_ + "' is not resolved by the radial rule");
    return cache_[key] = fine;
  }

  // <f, phi_k^{n-1}> over C^n.
  double laguerre_coefficient(int k, int n) const { return sphere_area(n) * inner(k, n - 1.0, 2 * n - 1); }

 private:
  std::string tag_;
  std::function<double(double)> f_;
  RadialRule rule_;
  QuadratureRule nodes_, fine_;
  std::shared_ptr<std::mutex> mu_ = std::make_shared<std::mutex>();
  mutable std::map<std::tuple<int, double, int>, double> cache_;
};

inline HarmonicBasisCache& spectral_basis_cache() {
  static HarmonicBasisCache cache(HarmonicBounds{4, 24});
  return cache;
}

struct ProjectionOptions {
  std::optional<GridGeometry> grid;
  ConvolutionOptions conv;
};

// Refuses f whose magnitude at the truncation radius is not negligible against its peak.
inline void require_decay(const PointFunction& f, int n, double radius, double ratio = 1e-4, std::uint64_t seed = 5) {
  SphereRule dirs = random_sphere_points(n, 32, seed);
  double peak = 0, edge = 0;
  for (int i = 0; i <= 32; ++i)
    for (const auto& w : dirs.nodes) peak = std::max(peak, std::abs(f(w * (radius * i / 32))));
  for (const auto& w : dirs.nodes) edge = std::max(edge, std::abs(f(w * radius)));
  if (edge > ratio * peak) throw domain_error("function does not decay inside the convolution grid");
}

// Q_k = f x phi_k^{n-1} at the probes.
inline std::vector<cplx> spectral_projection(const PointFunction& f, int k, int n, const std::vector<Point>& probes,
                                             const ProjectionOptions& o = {}) {
  require(k >= 0, "projection index must be nonnegative");
  GridGeometry geo = o.grid.value_or(default_geometry(n));
  require(geo.n == n, "grid dimension mismatch");
  require_decay(f, n, geo.L);
  GridFunction g = GridFunction::sample(geo, phi_function(k, n), "phi_" + std::to_string(k));
  return twisted_convolution(f, g, 1.0, probes, o.conv);
}

struct TailBound {
  enum class Status { ok, not_claimed };
  Status status = Status::ok;
  double value = 0;
  double radius = 0;
  int q_max = 0;
  int threshold = 0;    // n + k + 2: the largest of n + k - 2p + 2 over p
  double constant = 0;  // stands in for ||Q_k||_2
  int terms = 0;
  bool claimed() const { return status == Status::ok; }
};

// Majorant of sum_{p <= k} sum_{q > q_max} |P_pq(z) phi_{k-p}^{g-1}(z)| over |z| <= R, each term bounded by
// R^{p+q} sqrt(d(p,q)) binom(k-p+g-1, k-p) C / sqrt(|S^{2n-1}| ||phi_{k-p}^{g-1}||^2).
inline TailBound tail_bound(int k, int n, double R, int q_max, double constant) {
  require(k >= 0 && n >= 1 && q_max >= 0 && R >= 0 && constant >= 0, "invalid tail bound request");
  TailBound t;
  t.radius = R;
  t.q_max = q_max;
  t.threshold = n + k + 2;
  t.constant = constant;
  t.status = q_max >= t.threshold ? TailBound::Status::ok : TailBound::Status::not_claimed;
  if (R == 0 || constant == 0) return t;
  const double log_s = std::log(sphere_area(n));
  for (int p = 0; p <= k; ++p) {
    const int m = k - p;
    auto log_term = [&](int q) {
      const long d = dim_hpq(n, p, q);
      if (d == 0) return -std::numeric_limits<double>::infinity();
      const int g = n + p + q;
      const double log_binom = std::lgamma(m + g) - std::lgamma(m + 1.0) - std::lgamma(double(g));
      const double log_norm = (g - 1) * std::log(2.0) + std::lgamma(m + g) - std::lgamma(m + 1.0);
      return (p + q) * std::log(R) + 0.5 * std::log(double(d)) + log_binom + std::log(constant) - 0.5 * (log_s + log_norm);
    };
    double sum = 0;
    for (int q = q_max + 1;; ++q) {
      const double a = std::exp(log_term(q)), b = std::exp(log_term(q + 1));
      sum += a;
      ++t.terms;
      // the term ratio behaves like R / sqrt(2(n+p+q)) and decreases for large q
      const double ratio = a > 0 ? b / a : 0;
      if (q > q_max + 4 && ratio < 0.5 && b <= 1e-18 * sum) {
        sum += b / (1 - ratio);
        break;
      }
      if (q > q_max + 100000) throw truncation_error("tail series did not converge");
    }
    t.value += sum;
  }
  return t;
}

struct ExtractionOptions {
  std::optional<int> q_max;   // default n + k + 6
  double ball_radius = 2.0;   // R of the recorded tail bound
  RadialRule radial{12.0, 4, 16};
  std::optional<SphereRuleOptions> sphere;  // default n = 1: 64 nodes; n = 2: {k + q_max + 6, 24}
  double resolution_tol = 1e-10;
  double drop_tol = 1e-10;
};

struct SpectralExpansion {
  int k = 0, n = 1, q_max = 0;
  std::map<std::pair<int, int>, FloatBigraded> table;  // (p, q) -> P_{p,q}^k
  TailBound tail;
  double f_norm = 0;            // ||f||_2 from the extraction quadrature
  double resolution_change = 0;  // relative change of the coefficients under radial refinement

  bool empty() const { return table.empty(); }
};

inline int default_q_max(int n, int k) { return n + k + 6; }

// P_{p,q}^k = (2 pi)^n sum_j C_{k-p,j} Y_j with f(rho w) = sum a_j(rho) Y_j(w) and
// C_{m,j} = int a_j(t) phi_m^{g-1}(t) t^{2n-1+p+q} dt / ||phi_m^{g-1}||^2.
inline SpectralExpansion extract_expansion(const PointFunction& f, int k, int n, const ExtractionOptions& o = {},
                                           HarmonicBasisCache& cache = spectral_basis_cache()) {
  require(k >= 0 && n >= 1 && n <= kMaxDim, "invalid expansion request");
  const int q_max = o.q_max.value_or(default_q_max(n, k));
  require(q_max >= 0, "q_max must be nonnegative");
  SpectralExpansion out;
  out.k = k;
  out.n = n;
  out.q_max = q_max;

  SphereRuleOptions so = o.sphere.value_or(n == 1 ? SphereRuleOptions{64} : SphereRuleOptions{std::max(16, k + q_max + 6), 24});
  const SphereRule rule = make_sphere_rule(n, so);
  const QuadratureRule coarse = o.radial.build(), fine = o.radial.refined().build();
  std::vector<double> radii = coarse.nodes;
  radii.insert(radii.end(), fine.nodes.begin(), fine.nodes.end());
  const Eigen::Index N = static_cast<Eigen::Index>(rule.size()), Nr = static_cast<Eigen::Index>(radii.size());

  Eigen::MatrixXcd F(Nr, N);
  double peak = 0, edge = 0;
  for (Eigen::Index r = 0; r < Nr; ++r)
    for (Eigen::Index i = 0; i < N; ++i) {
      const cplx v = f(rule.nodes[i] * radii[r]);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw data_error("non-finite sample of f");
      F(r, i) = v;
      peak = std::max(peak, std::abs(v));
    }
  SphereRule outer = random_sphere_points(n, 64, 9);
  for (const auto& w : outer.nodes) edge = std::max(edge, std::abs(f(w * o.radial.r_max)));
  if (edge > 1e-10 * peak) throw truncation_error("f is not negligible at the radial cutoff " + std::to_string(o.radial.r_max));

  double norm_sq = 0;
  for (std::size_t r = 0; r < fine.size(); ++r) {
    double mean = 0;
    for (Eigen::Index i = 0; i < N; ++i) mean += rule.weights[i] * std::norm(F(coarse.size() + r, i));
    norm_sq += fine.weights[r] * mean * std::pow(fine.nodes[r], 2 * n - 1);
  }
  out.f_norm = std::sqrt(sphere_area(n) * norm_sq);

  struct Block {
    int p, q;
    std::shared_ptr<const HarmonicBasis> basis;
    Eigen::Index col;
  };
  std::vector<Block> blocks;
  Eigen::Index cols = 0;
  for (int p = 0; p <= k; ++p)
    for (int q = 0; q <= q_max; ++q) {
      if (p + q > 24) throw guardrail_error("bidegree beyond the spectral basis bound");
      auto b = cache.get(n, p, q);
      if (b->size() == 0) continue;
      blocks.push_back({p, q, b, cols});
      cols += static_cast<Eigen::Index>(b->size());
    }
  Eigen::MatrixXcd Ybar(N, cols);
  for (const auto& b : blocks)
    for (std::size_t j = 0; j < b.basis->size(); ++j) {
      CompiledPolynomial y(b.basis->elements[j].poly());
      const double norm2 = normalized_sphere_mean_square(b.basis->elements[j]).get_d();
      for (Eigen::Index i = 0; i < N; ++i) Ybar(i, b.col + j) = std::conj(y(rule.nodes[i])) * rule.weights[i] / norm2;
    }
  const Eigen::MatrixXcd A = F * Ybar;  // a_j(rho) at every radius

  const double two_pi_n = std::pow(2 * kPi, n);
  double scale = 0, change = 0;
  std::vector<std::vector<cplx>> coeffs(blocks.size());
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    const int m = k - b.p, gamma = n + b.p + b.q;
    const double nrm = phi_norm_sq(m, gamma).get_d();
    auto integrate = [&](const QuadratureRule& qr, Eigen::Index offset, Eigen::Index col) {
      cplx s = 0;
      for (std::size_t r = 0; r < qr.size(); ++r) {
        const double t = qr.nodes[r];
        s += qr.weights[r] * A(offset + r, col) * phi_radial(m, gamma - 1.0, t) * std::pow(t, 2 * n - 1 + b.p + b.q);
      }
      return s / nrm;
    };
    for (std::size_t j = 0; j < b.basis->size(); ++j) {
      const cplx c0 = integrate(coarse, 0, b.col + j), c1 = integrate(fine, coarse.size(), b.col + j);
      coeffs[bi].push_back(c1);
      // L2(C^n) norm of Y_j phi_m^{g-1}, so that coefficients are compared in the units of ||f||
      const double w = std::sqrt(sphere_area(n) * nrm * normalized_sphere_mean_square(b.basis->elements[j]).get_d());
      scale = std::max(scale, w * std::abs(c1));
      change = std::max(change, w * std::abs(c1 - c0));
    }
  }
  const double denom = std::max(scale, out.f_norm);
  out.resolution_change = denom > 0 ? change / denom : 0;
  if (out.resolution_change > o.resolution_tol)
    throw truncation_error("insufficient radial resolution: refinement changed coefficients by " +
                           std::to_string(out.resolution_change) + " relative");

  std::vector<FloatBigraded> assembled;
  std::vector<double> block_norm;
  double max_norm = 0;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    Polynomial<cplx> P(n);
    for (std::size_t j = 0; j < b.basis->size(); ++j)
      P += b.basis->elements[j].poly().to_floating() * (two_pi_n * coeffs[bi][j]);
    assembled.emplace_back(n, b.p, b.q, P);
    const double l2 = std::sqrt(sphere_area(n) * normalized_sphere_mean_square(assembled.back()) *
                                phi_norm_sq(k - b.p, n + b.p + b.q).get_d()) / two_pi_n;
    block_norm.push_back(l2);
    max_norm = std::max(max_norm, l2);
  }
  for (std::size_t bi = 0; bi < blocks.size(); ++bi)
    if (block_norm[bi] > std::max(o.drop_tol * max_norm, 1e-13 * out.f_norm))
      out.table.emplace(std::make_pair(blocks[bi].p, blocks[bi].q), assembled[bi]);

  out.tail = tail_bound(k, n, o.ball_radius, q_max, two_pi_n * out.f_norm);
  return out;
}

// Closed-form expansion of a planted mixture: (a P) x phi_k = (2 pi)^n <a, phi_{k-p}^{g-1}>_{t^{2g-1}} / ||phi||^2 P phi_{k-p}^{g-1}.
inline std::map<std::pair<int, int>, FloatBigraded> planted_expansion(const TypeMixture& f, int k, const RadialRule& radial = {}) {
  std::map<std::pair<int, int>, FloatBigraded> out;
  const int n = f.dim();
  const QuadratureRule rule = radial.build();
  for (const auto& t : f.terms()) {
    const int p = t.P.p(), q = t.P.q(), gamma = n + p + q;
    if (k < p) continue;
    const double c = radial_integral([&](double s) { return t.profile(s) * phi_radial(k - p, gamma - 1.0, s); }, 2 * gamma - 1, rule);
    FloatBigraded term = t.P * cplx(std::pow(2 * kPi, n) * c / phi_norm_sq(k - p, gamma).get_d());
    auto key = std::make_pair(p, q);
    auto it = out.find(key);
    if (it == out.end())
      out.emplace(key, term);
    else
      it->second = it->second + term;
  }
  return out;
}

inline cplx evaluate_table(const std::map<std::pair<int, int>, FloatBigraded>& table, int k, int n, const Point& z) {
  const double r = z.norm();
  cplx s = 0;
  for (const auto& [pq, P] : table) s += P(z) * phi_radial(k - pq.first, n + pq.first + pq.second - 1.0, r);
  return s;
}

// Truncated sum over p <= k, q <= q_max; refuses points outside the ball of the recorded tail bound.
inline cplx evaluate_expansion(const SpectralExpansion& e, const Point& z) {
  require(z.n == e.n, "point dimension mismatch");
  if (z.norm() > e.tail.radius * (1 + 1e-12)) throw domain_error("evaluation point lies outside the ball of the tail bound");
  return evaluate_table(e.table, e.k, e.n, z);
}

struct Reconstruction {
  std::vector<cplx> target;
  std::vector<cplx> values;      // partial sum through K
  std::vector<double> residuals;  // max over probes |S_K' - f| for K' = 0..K
};

// f ~ (2 pi)^{-n} sum_{k <= K} f x phi_k at the probes.
inline Reconstruction special_hermite_reconstruct(const PointFunction& f, int n, int K, const std::vector<Point>& probes,
                                                  const ProjectionOptions& o = {}) {
  require(K >= 0, "K must be nonnegative");
  Reconstruction out;
  for (const auto& z : probes) out.target.push_back(f(z));
  out.values.assign(probes.size(), 0.0);
  const double inv = std::pow(2 * kPi, -n);
  for (int k = 0; k <= K; ++k) {
    auto Q = spectral_projection(f, k, n, probes, o);
    double res = 0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      out.values[i] += inv * Q[i];
      res = std::max(res, std::abs(out.values[i] - out.target[i]));
    }
    out.residuals.push_back(res);
  }
  return out;
}

// (-Delta + |z|^2/4 - i sum_j (x_j d/dy_j - y_j d/dx_j)) F(z) by second-order central differences; samples[0] = F(z),
// then F(z + h e_a), F(z - h e_a) for each real axis a.
inline std::vector<Point> special_hermite_stencil(const Point& z, double h) {
  std::vector<Point> pts{z};
  for (int j = 0; j < z.n; ++j)
    for (cplx d : {cplx(h, 0), cplx(0, h)}) {
      Point a = z, b = z;
      a[j] += d;
      b[j] -= d;
      pts.push_back(a);
      pts.push_back(b);
    }
  return pts;
}

inline cplx special_hermite_apply(const Point& z, double h, const cplx* samples, bool rotation = true) {
  cplx lap = 0, rot = 0;
  for (int j = 0; j < z.n; ++j) {
    const cplx* s = samples + 1 + 4 * j;
    lap += s[0] + s[1] + s[2] + s[3] - 4.0 * samples[0];
    const cplx dx = (s[0] - s[1]) / (2 * h), dy = (s[2] - s[3]) / (2 * h);
    rot += z[j].real() * dy - z[j].imag() * dx;
  }
  cplx out = -lap / (h * h) + z.norm_sq() / 4 * samples[0];
  if (rotation) out -= cplx(0, 1) * rot;
  return out;
}

struct EigenLevel {
  double h = 0;
  double residual = 0;  // max |L Q_k - (2k+n) Q_k| / max |Q_k| over probes
};

struct EigenCheck {
  std::vector<EigenLevel> levels;
  double order = 0;  // log2 of the residual ratio between the first two levels
};

inline EigenCheck eigen_residual_check(const PointFunction& f, int k, int n, const std::vector<Point>& probes,
                                       const std::vector<double>& steps = {0.2, 0.1}, const ProjectionOptions& o = {},
                                       bool rotation = true) {
  require(!steps.empty(), "need at least one step size");
  EigenCheck out;
  for (double h : steps) {
    std::vector<Point> pts;
    for (const auto& z : probes) {
      auto s = special_hermite_stencil(z, h);
      pts.insert(pts.end(), s.begin(), s.end());
    }
    auto Q = spectral_projection(f, k, n, pts, o);
    const std::size_t per = 1 + 4 * n;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const cplx* s = Q.data() + i * per;
      num = std::max(num, std::abs(special_hermite_apply(probes[i], h, s, rotation) - double(2 * k + n) * s[0]));
      den = std::max(den, std::abs(s[0]));
    }
    out.levels.push_back({h, den > 0 ? num / den : num});
  }
  if (out.levels.size() >= 2 && out.levels[1].residual > 0)
    out.order = std::log2(out.levels[0].residual / out.levels[1].residual) / std::log2(out.levels[0].h / out.levels[1].h);
  return out;
}

struct ParsevalCheck {
  double direct = 0;   // ||Q_k||_2^2 by polar quadrature of the directly convolved Q_k
  double layered = 0;  // sum |S^{2n-1}| mean_sphere |P_pq|^2 ||phi_{k-p}^{g-1}||^2
  double rel_err = 0;
};

inline double layered_norm_sq(const SpectralExpansion& e) {
  double s = 0;
  for (const auto& [pq, P] : e.table)
    s += sphere_area(e.n) * normalized_sphere_mean_square(P) * phi_norm_sq(e.k - pq.first, e.n + pq.first + pq.second).get_d();
  return s;
}

// n = 1 only: the direct side needs Q_k on a full polar grid, which is out of reach for n = 2 at desk scale.
inline ParsevalCheck parseval_check(const PointFunction& f, const SpectralExpansion& e, double r_max = 8.0, int radial_nodes = 36,
                                    int angles = 12, const ConvolutionOptions& conv = {}) {
  require(e.n == 1, "the direct Parseval side is implemented for n = 1");
  ProjectionOptions o{GridGeometry{1, 2 * r_max, 224}, conv};
  QuadratureRule rr = RadialRule{r_max, radial_nodes / 12, 12}.build();
  std::vector<Point> pts;
  for (double r : rr.nodes)
    for (int a = 0; a < angles; ++a) pts.push_back(Point{std::polar(r, 2 * kPi * a / angles)});
  auto Q = spectral_projection(f, e.k, 1, pts, o);
  ParsevalCheck out;
  for (std::size_t i = 0; i < rr.size(); ++i) {
    double mean = 0;
    for (int a = 0; a < angles; ++a) mean += std::norm(Q[i * angles + a]) / angles;
    out.direct += rr.weights[i] * mean * rr.nodes[i];
  }
  out.direct *= sphere_area(1);
  out.layered = layered_norm_sq(e);
  out.rel_err = std::abs(out.direct - out.layered) / std::max(out.direct, 1e-300);
  return out;
}

// ---------------------------------------------------------------- sphere injectivity

struct SphereExperimentOptions {
  int k_max = 6;
  RadialRule radial{12.0, 6, 16};
  std::optional<SphereRuleOptions> nodes;  // default n = 1: 128 circle nodes; n = 2: {48, 24}
  int centers = 2;
  double noise_floor = 1e-8;
  double pin_threshold = 1e-6;   // |phi_{k-q}^{g-1}(R)| below this is not a usable pin
  double decay_exponent_limit = 0.02;
  double decay_radius = 12.0;
  std::uint64_t seed = 7;
};

struct SphereCoefficientRow {
  int k = 0;
  bool constrained = true;  // k >= q
  double phi_at_R = 0;
  bool exact_nonzero = false;      // L_{k-q}^{g-1}(R^2/2) != 0 in exact arithmetic at the rational R
  double root_distance = 0;        // distance of R^2/2 from the nearest isolated root interval
  bool pinned = false;             // the value at R determines <f, phi_k>
  cplx implied = 0;                // <f, phi_k> phi_{k-q}^{g-1}(R)
  double spread = 0;               // max deviation of implied values across centers
  std::optional<cplx> recovered;   // implied / phi(R) when pinned
  double truth = 0;                // <f, phi_k> by radial quadrature
  bool pinned_zero = false;
};

struct SphereRadiusReport {
  double R = 0;
  std::vector<SphereCoefficientRow> rows;
};

struct SphereExperiment {
  int n = 1;
  int p = 0, q = 0;
  double decay_exponent = 0;
  std::vector<SphereRadiusReport> radii;
  std::vector<int> unresolved;     // k >= q pinned by no radius
  std::vector<int> unconstrained;  // k < q
  bool all_pinned_zero = false;    // every constrained k pinned to zero by some radius
  double max_recovery_error = 0;   // max |recovered - truth| / max |truth| over pinned rows
  std::uint64_t seed = 0;
};

// Gaussian rate b of e^{r^2/4}|f(r)| ~ r^c e^{b r^2} fitted on the outer half of [0, radius]; b > 0 means f decays
// slower than e^{-r^2/4}.
inline double decay_exponent(const std::function<double(double)>& f, double radius) {
  const int windows = 12, per = 16;
  std::vector<double> rs, ls;
  for (int w = 0; w < windows; ++w) {
    double best = 0, at = 0;
    for (int i = 0; i <= per; ++i) {
      const double r = radius / 2 + (radius / 2) * (w * per + i) / double(windows * per);
      const double v = std::abs(f(r)) * std::exp(r * r / 4);
      if (v > best) best = v, at = r;
    }
    if (best > 0) rs.push_back(at), ls.push_back(std::log(best));
  }
  if (rs.size() < 3) return 0;
  Eigen::MatrixXd M(rs.size(), 3);
  Eigen::VectorXd y(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    M(i, 0) = 1;
    M(i, 1) = std::log(rs[i]);
    M(i, 2) = rs[i] * rs[i];
    y(i) = ls[i];
  }
  return M.colPivHouseholderQr().solve(y)(2);
}

// f x nu_r on S_R with dnu_r = P dmu_r; per k, int (f x nu_r)(z) phi_{k-q}^{g-1}(r) r^{2n-1} dr
// = B_k^{-1} |S^{2n-1}| <f, phi_k> phi_{k-q}^{g-1}(R) P(z) for |z| = R.
inline SphereExperiment sphere_injectivity_experiment(const std::function<double(double)>& profile, const FloatBigraded& P,
                                                      const std::vector<double>& sphere_radii,
                                                      const SphereExperimentOptions& o = {}) {
  const int n = P.dim(), p = P.p(), q = P.q(), gamma = n + p + q;
  require(!P.is_zero(), "weight polynomial must be nonzero");
  require(!sphere_radii.empty(), "need at least one sphere radius");
  require(o.k_max >= 0, "k_max must be nonnegative");
  if (laplacian(P.poly()).max_abs_coefficient() > 1e-12 * P.poly().max_abs_coefficient())
    throw precondition_error("weight polynomial is not harmonic");
  PointFunction f = [&profile](const Point& z) { return cplx(profile(z.norm())); };
  require_radial(f, n);
  SphereExperiment out;
  out.n = n;
  out.p = p;
  out.q = q;
  out.seed = o.seed;
  out.decay_exponent = decay_exponent(profile, o.decay_radius);
  if (out.decay_exponent > o.decay_exponent_limit)
    throw hypothesis_error("e^{|z|^2/4} f grows like a Gaussian (fitted rate " + std::to_string(out.decay_exponent) +
                           "); the decay hypothesis fails");

  RadialProfile prof("f", profile, o.radial);
  const SphereRuleOptions so = o.nodes.value_or(n == 1 ? SphereRuleOptions{128} : SphereRuleOptions{48, 24});
  const SphereRule rule = make_sphere_rule(n, so);
  const QuadratureRule rr = o.radial.build();
  SphereRule dirs = random_sphere_points(n, 256, o.seed);
  std::vector<std::pair<double, Point>> ranked;
  for (const auto& w : dirs.nodes) ranked.push_back({std::abs(P(w)), w});
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  LaguerreZeroScanner scanner(Rational(gamma - 1), Rational(4 * (o.k_max + gamma) + 64), Rational(1, 1000000000));
  std::vector<double> truth(o.k_max + 1);
  double truth_scale = 0;
  for (int k = 0; k <= o.k_max; ++k) {
    truth[k] = prof.laguerre_coefficient(k, n);
    truth_scale = std::max(truth_scale, std::abs(truth[k]));
  }

  std::map<int, bool> pinned_somewhere, zero_somewhere;
  double err = 0;
  for (double R : sphere_radii) {
    require(R > 0, "sphere radius must be positive");
    SphereRadiusReport rep{R};
    std::vector<Point> centers;
    for (int c = 0; c < o.centers && c < static_cast<int>(ranked.size()); ++c) centers.push_back(ranked[c].second * R);
    // data[c][i] = (f x nu_{r_i})(z_c)
    std::vector<std::vector<cplx>> data(centers.size(), std::vector<cplx>(rr.size()));
    for (std::size_t c = 0; c < centers.size(); ++c)
      for (std::size_t i = 0; i < rr.size(); ++i) {
        SphereMeasureSpec spec{std::nullopt, rr.nodes[i], so, P};
        data[c][i] = twisted_spherical_mean(f, spec, rule, centers[c]).value;
      }
    const Rational x = Rational(to_rational(R) * to_rational(R) / 2);
    for (int k = 0; k <= o.k_max; ++k) {
      SphereCoefficientRow row;
      row.k = k;
      row.truth = truth[k];
      row.constrained = k >= q;
      if (!row.constrained) {
        rep.rows.push_back(row);
        continue;
      }
      const int m = k - q;
      row.phi_at_R = phi_radial(m, gamma - 1.0, R);
      row.root_distance = std::numeric_limits<double>::infinity();
      const RationalPoly lag = laguerre_coeffs(m, Rational(gamma - 1));
      for (RootInterval iv : scanner.roots(m)) {
        for (int it = 0; it < 256 && !iv.exact && iv.lo <= x && x <= iv.hi; ++it) bisect_root(lag, iv);
        const double d = x < iv.lo ? Rational(iv.lo - x).get_d() : (x > iv.hi ? Rational(x - iv.hi).get_d() : 0.0);
        row.root_distance = std::min(row.root_distance, d);
      }
      row.exact_nonzero = sgn(lag(x)) != 0;
      const double B = radial_projection_constant(k, n).get_d();
      std::vector<cplx> implied;
      for (std::size_t c = 0; c < centers.size(); ++c) {
        cplx s = 0;
        for (std::size_t i = 0; i < rr.size(); ++i)
          s += rr.weights[i] * data[c][i] * phi_radial(m, gamma - 1.0, rr.nodes[i]) * std::pow(rr.nodes[i], 2 * n - 1);
        implied.push_back(sphere_area(n) / B * s / P(centers[c]));
      }
      for (const auto& v : implied) row.implied += v / double(implied.size());
      for (const auto& v : implied) row.spread = std::max(row.spread, std::abs(v - row.implied));
      row.pinned = row.exact_nonzero && row.root_distance > 0 && std::abs(row.phi_at_R) >= o.pin_threshold;
      if (row.pinned) {
        row.recovered = row.implied / row.phi_at_R;
        row.pinned_zero = std::abs(*row.recovered) < o.noise_floor;
        pinned_somewhere[k] = true;
        if (row.pinned_zero) zero_somewhere[k] = true;
        err = std::max(err, std::abs(*row.recovered - row.truth));
      }
      rep.rows.push_back(row);
    }
    out.radii.push_back(std::move(rep));
  }
  out.all_pinned_zero = true;
  for (int k = 0; k <= o.k_max; ++k) {
    if (k < q) {
      out.unconstrained.push_back(k);
      continue;
    }
    if (!pinned_somewhere[k]) out.unresolved.push_back(k);
    if (!zero_somewhere[k]) out.all_pinned_zero = false;
  }
  out.max_recovery_error = truth_scale > 0 ? err / truth_scale : err;
  return out;
}

// ---------------------------------------------------------------- cone injectivity

struct ConeOptions {
  int k_max = 2;
  int t_max = 4;
  int r_nodes = 16;
  double r_max = 2.5;
  int theta_nodes = 16;
  double condition_limit = 1e10;
  double zero_tol = 1e-8;      // fitted |P_st(z0)| below this counts as forced to zero
  double richardson_radius = 0.2;
  ExtractionOptions extraction{};
  std::uint64_t seed = 11;
};

struct ConeFitRow {
  int k = 0, direction = 0, s = 0, t = 0;
  cplx fitted = 0;
  cplx planted = 0;
  bool forced_zero = false;
  std::optional<double> weight_fit;  // leading r-coefficient / planted value, when this type is the lowest of its frequency
  double weight_expected = 0;        // binom(n+k+t-1, k-s)
};

struct ConeExperiment {
  std::vector<Point> directions;
  std::vector<ConeFitRow> rows;
  std::vector<std::pair<int, int>> present_types;  // (s, t) carried by f
  std::vector<std::pair<int, int>> vanishing_types;  // present types with every fitted value zero
  bool injective_for_class = false;
  bool non_injective_detected = false;  // f != 0 but every fitted coefficient vanishes
  double max_condition = 0;
  double max_fit_residual = 0;  // least-squares residual relative to the largest frequency component
  double max_rel_error = 0;     // fitted versus planted, relative to the largest planted value per k
  double max_weight_error = 0;  // relative
  double frequency_coupling = 0;
  std::uint64_t seed = 0;
};

namespace detail {
inline double cone_column(int k, int n, int s, int t, double r) { return std::pow(r, s + t) * phi_radial(k - s, n + s + t - 1.0, r); }
}  // namespace detail

// Largest normalized inner product between (r, theta) design columns of distinct frequencies s - t.
inline double cone_frequency_coupling(int k, int n, int t_max, int r_nodes, double r_max, int theta_nodes) {
  std::vector<std::pair<int, int>> types;
  for (int s = 0; s <= k; ++s)
    for (int t = 0; t <= t_max; ++t) types.push_back({s, t});
  const int rows = r_nodes * theta_nodes;
  Eigen::MatrixXcd M(rows, types.size());
  for (int a = 0; a < r_nodes; ++a)
    for (int b = 0; b < theta_nodes; ++b) {
      const double r = r_max * (a + 1) / r_nodes, th = 2 * kPi * b / theta_nodes;
      for (std::size_t c = 0; c < types.size(); ++c) {
        auto [s, t] = types[c];
        M(a * theta_nodes + b, c) = detail::cone_column(k, n, s, t, r) * std::polar(1.0, (s - t) * th);
      }
    }
  Eigen::MatrixXcd G = M.adjoint() * M;
  double worst = 0;
  for (std::size_t i = 0; i < types.size(); ++i)
    for (std::size_t j = 0; j < types.size(); ++j)
      if (types[i].first - types[i].second != types[j].first - types[j].second)
        worst = std::max(worst, std::abs(G(i, j)) / std::sqrt(std::abs(G(i, i) * G(j, j))));
  return worst;
}

// Q_k(r e^{i theta} z0) = sum_{s,t} P_st(z0) e^{i(s-t) theta} r^{s+t} phi_{k-s}^{n+s+t-1}(r): theta-DFT per radius, then a
// least-squares fit per frequency. Q_k is sampled from the extracted expansion; planted values come from the closed form.
inline ConeExperiment cone_injectivity_experiment(const TypeMixture& f, const std::vector<Point>& directions,
                                                  const ConeOptions& o = {}) {
  const int n = f.dim();
  require(!directions.empty(), "cone needs at least one direction");
  require(o.theta_nodes > o.k_max + o.t_max, "theta grid aliases the fitted frequencies");
  require(o.r_nodes > o.t_max + 1, "radial grid too small for the fit");
  ConeExperiment out;
  out.seed = o.seed;
  for (const auto& d : directions) {
    require(d.n == n, "direction dimension mismatch");
    require(std::abs(d.norm() - 1) < 1e-12, "cone directions must be unit vectors");
    out.directions.push_back(d);
  }
  std::set<std::pair<int, int>> present;
  for (const auto& t : f.terms()) present.insert({t.P.p(), t.P.q()});
  out.present_types.assign(present.begin(), present.end());
  out.frequency_coupling = cone_frequency_coupling(o.k_max, n, o.t_max, o.r_nodes, o.r_max, o.theta_nodes);

  bool any_nonzero_fit = false;
  std::map<std::pair<int, int>, bool> seen_nonzero;
  for (int k = 0; k <= o.k_max; ++k) {
    ExtractionOptions eo = o.extraction;
    eo.ball_radius = o.r_max;
    SpectralExpansion e = extract_expansion(f.function(), k, n, eo);
    auto truth = planted_expansion(f, k, eo.radial);
    for (const auto& [pq, P] : truth)
      if (pq.second > o.t_max) throw precondition_error("planted type exceeds the fitted t range");
    for (std::size_t di = 0; di < directions.size(); ++di) {
      const Point& z0 = directions[di];
      std::vector<double> radii;
      for (int a = 0; a < o.r_nodes; ++a) radii.push_back(o.r_max * (a + 1) / o.r_nodes);
      for (double h : {o.richardson_radius, o.richardson_radius / 2, o.richardson_radius / 4}) radii.push_back(h);
      // g[beta][radius]
      std::map<int, std::vector<cplx>> g;
      for (int beta = -o.t_max; beta <= o.k_max; ++beta) g[beta].assign(radii.size(), 0.0);
      for (std::size_t a = 0; a < radii.size(); ++a) {
        std::vector<cplx> ring(o.theta_nodes);
        for (int b = 0; b < o.theta_nodes; ++b) ring[b] = evaluate_expansion(e, z0 * std::polar(radii[a], 2 * kPi * b / o.theta_nodes));
        for (auto& [beta, v] : g) {
          cplx s = 0;
          for (int b = 0; b < o.theta_nodes; ++b) s += ring[b] * std::polar(1.0, -beta * 2 * kPi * b / o.theta_nodes);
          v[a] = s / double(o.theta_nodes);
        }
      }
      double planted_scale = 0, residual = 0, sample_scale = 0;
      for (const auto& [pq, P] : truth) planted_scale = std::max(planted_scale, std::abs(P(z0)));
      for (const auto& [beta, v] : g) {
        std::vector<std::pair<int, int>> cols;
        for (int t = 0; t <= o.t_max; ++t)
          if (t + beta >= 0 && t + beta <= k) cols.push_back({t + beta, t});
        if (cols.empty()) continue;
        Eigen::MatrixXcd M(o.r_nodes, cols.size());
        Eigen::VectorXcd y(o.r_nodes);
        Eigen::VectorXd colnorm(cols.size());
        for (int a = 0; a < o.r_nodes; ++a) {
          y(a) = v[a];
          for (std::size_t c = 0; c < cols.size(); ++c) M(a, c) = detail::cone_column(k, n, cols[c].first, cols[c].second, radii[a]);
        }
        for (std::size_t c = 0; c < cols.size(); ++c) {
          colnorm(c) = M.col(c).norm();
          M.col(c) /= colnorm(c);
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double cond = sv(0) / sv(sv.size() - 1);
        out.max_condition = std::max(out.max_condition, cond);
        if (!(cond <= o.condition_limit)) throw truncation_error("ill-conditioned cone fit; refine the (r, theta) grid or lower t_max");
        Eigen::VectorXcd x = svd.solve(y);
        residual = std::max(residual, (M * x - y).norm());
        sample_scale = std::max(sample_scale, y.norm());
        bool lowest_done = false;
        for (std::size_t c = 0; c < cols.size(); ++c) {
          ConeFitRow row;
          row.k = k;
          row.direction = static_cast<int>(di);
          row.s = cols[c].first;
          row.t = cols[c].second;
          row.fitted = x(c) / colnorm(c);
          auto it = truth.find(cols[c]);
          if (it != truth.end()) row.planted = it->second(z0);
          row.forced_zero = std::abs(row.fitted) < o.zero_tol;
          if (!row.forced_zero) {
            any_nonzero_fit = true;
            seen_nonzero[cols[c]] = true;
          }
          if (planted_scale > 0)
            out.max_rel_error = std::max(out.max_rel_error, std::abs(row.fitted - row.planted) / planted_scale);
          row.weight_expected = binomial(n + k + row.t - 1, k - row.s).get_d();
          if (!lowest_done && std::abs(row.planted) > 1e-6 * std::max(planted_scale, 1e-300)) {
            lowest_done = true;
            // h(r) = e^{r^2/4} g_beta(r) / r^{s+t} = c0 + c1 r^2 + ..., extrapolated to r = 0
            std::array<double, 3> hs{};
            std::array<cplx, 3> hv{};
            for (int i = 0; i < 3; ++i) {
              const double r = radii[o.r_nodes + i];
              hs[i] = r;
              hv[i] = std::exp(r * r / 4) * v[o.r_nodes + i] / std::pow(r, row.s + row.t);
            }
            const cplx r1 = (4.0 * hv[1] - hv[0]) / 3.0, r2 = (4.0 * hv[2] - hv[1]) / 3.0;
            const cplx lim = (16.0 * r2 - r1) / 15.0;
            row.weight_fit = (lim / row.planted).real();
            out.max_weight_error = std::max(out.max_weight_error, std::abs(*row.weight_fit - row.weight_expected) / row.weight_expected);
          }
          out.rows.push_back(row);
        }
      }
      if (sample_scale > 0) out.max_fit_residual = std::max(out.max_fit_residual, residual / sample_scale);
    }
  }
  for (const auto& t : out.present_types)
    if (!seen_nonzero[t]) out.vanishing_types.push_back(t);
  out.injective_for_class = out.vanishing_types.empty();
  out.non_injective_detected = !f.terms().empty() && !any_nonzero_fit;
  return out;
}

// ---------------------------------------------------------------- corpus

struct CorpusEntry {
  TypeMixture f;
  int k = 2;
};

inline FloatBigraded monomial_type(int n, std::array<int, kMaxDim> alpha, std::array<int, kMaxDim> beta, cplx c = 1.0) {
  Monomial m;
  for (int j = 0; j < kMaxDim; ++j) {
    m.alpha[j] = static_cast<std::uint8_t>(alpha[j]);
    m.beta[j] = static_cast<std::uint8_t>(beta[j]);
  }
  Polynomial<cplx> P(n);
  P.add_term(m, c);
  return FloatBigraded::from_polynomial(P);
}

inline std::function<double(double)> gaussian_profile(double width, int power = 0, double c = 1.0) {
  return [=](double r) { return c * std::pow(r, power) * std::exp(-r * r / width); };
}

// Ten planted mixtures of type functions, five for n = 1 and five for n = 2.
inline std::vector<CorpusEntry> spectral_corpus() {
  std::vector<CorpusEntry> c;
  {
    TypeMixture f(1, "gaussian");
    f.add(gaussian_profile(2), monomial_type(1, {}, {}));
    c.push_back({f, 2});
  }
  {
    TypeMixture f(1, "z e^{-r^2/3}");
    f.add(gaussian_profile(3), monomial_type(1, {1}, {}));
    c.push_back({f, 2});
  }
  {
    TypeMixture f(1, "e^{-r^2/2}(1 + zbar/2)");
    f.add(gaussian_profile(2), monomial_type(1, {}, {}));
    f.add(gaussian_profile(2, 0, 0.5), monomial_type(1, {}, {1}));
    c.push_back({f, 3});
  }
  {
    TypeMixture f(1, "(1+r^2) z^2 e^{-r^2/2.5} + 0.3 zbar e^{-r^2/2}");
    f.add([](double r) { return (1 + r * r) * std::exp(-r * r / 2.5); }, monomial_type(1, {2}, {}));
    f.add(gaussian_profile(2, 0, 0.3), monomial_type(1, {}, {1}));
    c.push_back({f, 2});
  }
  {
    TypeMixture f(1, "phi_0^2 zbar^2 + 0.2 r^2 e^{-r^2/2}");
    f.add([](double r) { return phi_radial(0, 2, r); }, monomial_type(1, {}, {2}));
    f.add(gaussian_profile(2, 2, 0.2), monomial_type(1, {}, {}));
    c.push_back({f, 1});
  }
  {
    TypeMixture f(2, "gaussian");
    f.add(gaussian_profile(2), monomial_type(2, {}, {}));
    c.push_back({f, 2});
  }
  {
    TypeMixture f(2, "phi_0^2 z1");
    f.add([](double r) { return phi_radial(0, 2, r); }, monomial_type(2, {1, 0}, {}));
    c.push_back({f, 1});
  }
  {
    TypeMixture f(2, "z1 zbar2 e^{-r^2/3}");
    f.add(gaussian_profile(3), monomial_type(2, {1, 0}, {0, 1}));
    c.push_back({f, 2});
  }
  {
    TypeMixture f(2, "e^{-r^2/2}(zbar1 + z1 z2/2)");
    f.add(gaussian_profile(2), monomial_type(2, {}, {1, 0}));
    f.add(gaussian_profile(2, 0, 0.5), monomial_type(2, {1, 1}, {}));
    c.push_back({f, 2});
  }
  {
    TypeMixture f(2, "(|z1|^2 - |z2|^2) e^{-r^2/2.5} + 0.2 e^{-r^2/2}");
    Polynomial<cplx> P(2);
    Monomial a, b;
    a.alpha = {1, 0};
    a.beta = {1, 0};
    b.alpha = {0, 1};
    b.beta = {0, 1};
    P.add_term(a, 1.0);
    P.add_term(b, -1.0);
    f.add(gaussian_profile(2.5), FloatBigraded(2, 1, 1, P));
    f.add(gaussian_profile(2, 0, 0.2), monomial_type(2, {}, {}));
    c.push_back({f, 1});
  }
  return c;
}

}  // namespace hbl
