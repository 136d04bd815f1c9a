#pragma once

#include <atomic>
#include <optional>
#include <random>
#include <thread>

#include "hbl/grid.hpp"
#include "hbl/harmonics.hpp"
#include "hbl/laguerre.hpp"
#include "hbl/quadrature.hpp"
#include "hbl/sphere.hpp"

namespace hbl {

struct ConvolutionOptions {
  int threads = 0;           // 0: hardware concurrency
  std::size_t tile = 16384;  // grid nodes per deterministic partial sum
};

inline GridGeometry default_geometry(int n) {
  if (n == 1) return {1, 12.0, 256};
  return {2, 8.0, 32};
}

namespace detail {

inline int thread_count(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(task) for task in [0, count) on a worker pool; results must be written by index.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  const int t = std::min<std::size_t>(thread_count(threads), std::max<std::size_t>(count, 1));
  if (t <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < t; ++w)
    pool.emplace_back([&] {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next = count;
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline void check_probe(const GridGeometry& g, const Point& z) {
  require(z.n == g.n, "evaluation point dimension does not match the grid");
  for (int j = 0; j < g.n; ++j)
    for (double c : {z[j].real(), z[j].imag()})
      if (!(std::abs(c) <= g.L / 2 + 1e-12))
        throw domain_error("evaluation point too close to the truncation boundary (|coordinate| must be <= L/2)");
}

// Per-axis factors of exp(i lambda/2 Im(z . conj w)) = prod_j exp(i lambda/2 (Im z_j Re w_j - Re z_j Im w_j)).
inline std::vector<std::vector<cplx>> phase_tables(const GridGeometry& g, double lambda, const Point& z) {
  std::vector<std::vector<cplx>> t(g.axes(), std::vector<cplx>(g.steps));
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.steps; ++i) {
      const double x = g.node(i);
      t[2 * j][i] = std::polar(1.0, lambda / 2 * z[j].imag() * x);
      t[2 * j + 1][i] = std::polar(1.0, -lambda / 2 * z[j].real() * x);
    }
  return t;
}

// sum_w src(idx, w) g(w) phase(z, w) h^{2n}, split into fixed tiles summed in order.
template <class Src>
std::vector<cplx> twisted_sums(const GridGeometry& geo, const std::vector<cplx>& g, double lambda,
                               const std::vector<Point>& zs, Src&& src, const ConvolutionOptions& opts) {
  const std::size_t total = geo.size();
  const std::size_t tile = std::max<std::size_t>(opts.tile, 1);
  const std::size_t tiles = (total + tile - 1) / tile;
  std::vector<std::vector<std::vector<cplx>>> phases(zs.size());
  for (std::size_t p = 0; p < zs.size(); ++p) phases[p] = phase_tables(geo, lambda, zs[p]);
  std::vector<cplx> partial(zs.size() * tiles);
  const int axes = geo.axes();
  parallel_for(zs.size() * tiles, opts.threads, [&](std::size_t task) {
    const std::size_t p = task / tiles, tl = task % tiles;
    const auto& ph = phases[p];
    std::size_t begin = tl * tile, end = std::min(total, begin + tile);
    std::array<int, 2 * kMaxDim> idx{};
    std::size_t rem = begin;
    for (int a = axes - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % geo.steps);
      rem /= geo.steps;
    }
    cplx s = 0;
    for (std::size_t t = begin; t < end; ++t) {
      if (g[t] != cplx(0)) {
        cplx phase = 1;
        for (int a = 0; a < axes; ++a) phase *= ph[a][idx[a]];
        s += src(p, idx) * g[t] * phase;
      }
      for (int a = axes - 1; a >= 0; --a) {
        if (++idx[a] < geo.steps) break;
        idx[a] = 0;
      }
    }
    partial[task] = s;
  });
  const double vol = std::pow(geo.h(), axes);
  std::vector<cplx> out(zs.size());
  for (std::size_t p = 0; p < zs.size(); ++p) {
    cplx s = 0;
    for (std::size_t tl = 0; tl < tiles; ++tl) s += partial[p * tiles + tl];
    out[p] = s * vol;
  }
  return out;
}

// Multilinear interpolation stencil for f(z - w) on the grid, the same for every node w.
struct ShiftStencil {
  std::vector<std::array<int, 2 * kMaxDim>> offsets;
  std::vector<double> weights;
};

inline ShiftStencil shift_stencil(const GridGeometry& g, const Point& z) {
  // node index of z - w_i along an axis is s - i with s = (c + 2L) / h
  std::array<int, 2 * kMaxDim> base{};
  std::array<double, 2 * kMaxDim> frac{};
  for (int a = 0; a < g.axes(); ++a) {
    const double c = a % 2 == 0 ? z[a / 2].real() : z[a / 2].imag();
    const double s = (c + 2 * g.L) / g.h();
    double fl = std::floor(s);
    double th = s - fl;
    if (th < 1e-9) th = 0;
    if (th > 1 - 1e-9) {
      fl += 1;
      th = 0;
    }
    base[a] = static_cast<int>(fl);
    frac[a] = th;
  }
  ShiftStencil st;
  const int corners = 1 << g.axes();
  for (int c = 0; c < corners; ++c) {
    double w = 1;
    std::array<int, 2 * kMaxDim> off{};
    for (int a = 0; a < g.axes(); ++a) {
      const int e = (c >> a) & 1;
      w *= e ? frac[a] : 1 - frac[a];
      off[a] = base[a] + e;
    }
    if (w == 0) continue;
    st.offsets.push_back(off);
    st.weights.push_back(w);
  }
  return st;
}

}  // namespace detail

// (f x_lambda g)(z) = int f(z - w) g(w) exp(i lambda/2 Im(z . conj w)) dw with f, g sampled; f(z - w) is
// interpolated multilinearly when z is off the grid lattice.
inline std::vector<cplx> twisted_convolution(const GridFunction& f, const GridFunction& g, double lambda,
                                             const std::vector<Point>& zs, const ConvolutionOptions& opts = {}) {
  f.validate();
  g.validate();
  require(f.geometry == g.geometry, "grid functions must share geometry");
  const GridGeometry& geo = g.geometry;
  for (const auto& z : zs) detail::check_probe(geo, z);
  std::vector<detail::ShiftStencil> stencils;
  for (const auto& z : zs) stencils.push_back(detail::shift_stencil(geo, z));
  const int axes = geo.axes();
  auto src = [&](std::size_t p, const std::array<int, 2 * kMaxDim>& idx) {
    const auto& st = stencils[p];
    cplx v = 0;
    for (std::size_t c = 0; c < st.weights.size(); ++c) {
      std::size_t flat = 0;
      bool inside = true;
      for (int a = 0; a < axes; ++a) {
        const int k = st.offsets[c][a] - idx[a];
        if (k < 0 || k >= geo.steps) {
          inside = false;
          break;
        }
        flat = flat * geo.steps + k;
      }
      if (inside) v += st.weights[c] * f.samples[flat];
    }
    return v;
  };
  return detail::twisted_sums(geo, g.samples, lambda, zs, src, opts);
}

// Same with f given in closed form (evaluated exactly at z - w); f must be safe to call concurrently.
inline std::vector<cplx> twisted_convolution(const PointFunction& f, const GridFunction& g, double lambda,
                                             const std::vector<Point>& zs, const ConvolutionOptions& opts = {}) {
  g.validate();
  const GridGeometry& geo = g.geometry;
  for (const auto& z : zs) detail::check_probe(geo, z);
  auto src = [&](std::size_t p, const std::array<int, 2 * kMaxDim>& idx) {
    cplx v = f(zs[p] - geo.point(idx));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw data_error("function returned a non-finite value");
    return v;
  };
  return detail::twisted_sums(geo, g.samples, lambda, zs, src, opts);
}

inline PointFunction phi_function(int k, int n) {
  return [k, n](const Point& z) { return cplx(eval_phi(k, n, z)); };
}

// dnu_r = P dmu_r on the sphere S_r(center); without P this is the normalized surface measure.
struct SphereMeasureSpec {
  std::optional<Point> center;
  double radius = 1.0;
  SphereRuleOptions nodes{64, 32, 20000, 1};
  std::optional<FloatBigraded> weight;
};

struct TsmResult {
  cplx value;
  bool under_resolved = false;
  int required_nodes = 0;
};

namespace detail {
inline int required_circle_nodes(double r, const Point& z, double lambda, int weight_degree) {
  return 2 * (weight_degree + static_cast<int>(std::ceil(r * z.norm() * (1 + std::abs(lambda)) / 2 + r * r))) + 16;
}
}  // namespace detail

// int f(z - w) P(w - center) exp(i lambda/2 Im(z . conj w)) dmu_r(w) by a fixed sphere rule.
inline TsmResult twisted_spherical_mean(const PointFunction& f, const SphereMeasureSpec& spec, const SphereRule& rule,
                                        const Point& z, double lambda = 1.0) {
  require(spec.radius > 0, "sphere radius must be positive");
  require(rule.n == z.n, "sphere rule dimension does not match the point");
  const int n = z.n;
  Point center = spec.center.value_or(Point(n));
  std::optional<CompiledPolynomial> P;
  int degree = 0;
  if (spec.weight) {
    require(spec.weight->dim() == n, "weight polynomial dimension mismatch");
    P.emplace(spec.weight->poly());
    degree = spec.weight->p() + spec.weight->q();
  }
  cplx s = 0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    Point rel = rule.nodes[i] * spec.radius;
    Point w = center + rel;
    cplx v = f(z - w) * std::polar(1.0, lambda / 2 * symplectic(z, w));
    if (P) v *= (*P)(rel);
    s += rule.weights[i] * v;
  }
  TsmResult r{s};
  if (n <= 2) {
    r.required_nodes = detail::required_circle_nodes(spec.radius, z - center, lambda, degree);
    r.under_resolved = spec.nodes.n_theta < r.required_nodes || (n == 2 && 2 * spec.nodes.n_eta < r.required_nodes);
  }
  return r;
}

inline TsmResult twisted_spherical_mean(const PointFunction& f, const SphereMeasureSpec& spec, const Point& z,
                                        double lambda = 1.0) {
  return twisted_spherical_mean(f, spec, make_sphere_rule(z.n, spec.nodes), z, lambda);
}

// Rejects f unless f(sigma z) = f(z) for sampled unitary sigma and points.
inline void require_radial(const PointFunction& f, int n, double max_radius = 6.0, std::uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rad(0.0, max_radius);
  SphereRule dirs = random_sphere_points(n, 24, seed);
  double scale = 0;
  std::vector<std::pair<double, double>> errs;
  for (int i = 0; i < 8; ++i) {
    const double r = rad(rng);
    cplx ref = f(dirs.nodes[0] * r);
    scale = std::max(scale, std::abs(ref));
    for (std::size_t d = 1; d < dirs.size(); ++d) errs.push_back({std::abs(f(dirs.nodes[d] * r) - ref), r});
  }
  for (const auto& [e, r] : errs)
    if (e > 1e-10 * std::max(scale, 1e-300)) throw precondition_error("function is not radial");
}

struct ProjectionCheck {
  std::vector<Point> probes;
  std::vector<cplx> lhs, rhs;
  double coefficient = 0;  // <f, phi_k>
  double rel_err = 0;
};

inline double relative_error(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0 ? num / den : num;
}

inline std::vector<Point> default_probes(int n, double extent, int count, std::uint64_t seed = 17) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-extent, extent);
  std::vector<Point> out;
  for (int i = 0; i < count; ++i) {
    Point p(n);
    for (int j = 0; j < n; ++j) p[j] = {u(rng), u(rng)};
    out.push_back(p);
  }
  return out;
}

// f x phi_k = B_k^n <f, phi_k> phi_k for radial f, with <f, phi_k> = |S^{2n-1}| int f phi_k r^{2n-1} dr.
inline ProjectionCheck radial_projection_check(const std::function<double(double)>& profile, int k, int n,
                                               const std::vector<Point>& probes, const GridGeometry& geo,
                                               const ConvolutionOptions& opts = {}, const RadialRule& radial = {}) {
  PointFunction f = [&profile](const Point& z) { return cplx(profile(z.norm())); };
  require_radial(f, n);
  GridFunction g = GridFunction::sample(geo, phi_function(k, n), "phi");
  ProjectionCheck out{probes};
  out.lhs = twisted_convolution(f, g, 1.0, probes, opts);
  QuadratureRule rule = radial.build();
  out.coefficient =
      sphere_area(n) * radial_integral([&](double r) { return profile(r) * phi_radial(k, n - 1.0, r); }, 2 * n - 1, rule);
  const double B = radial_projection_constant(k, n).get_d();
  for (const auto& z : probes) out.rhs.push_back(B * out.coefficient * eval_phi(k, n, z));
  out.rel_err = relative_error(out.lhs, out.rhs);
  return out;
}

struct WeightedFit {
  cplx constant;             // fitted K in K t^{2(p+q)} phi_{k-q}^{g-1}(t) P(z) phi_{k-q}^{g-1}(z)
  double closed_form = 0;    // (2 pi)^n / (|S^{2n-1}| ||phi_{k-q}^{g-1}||^2)
  double residual = 0;       // ||lhs - K shape|| / ||lhs||
  double max_abs_lhs = 0;
  bool vanishing = false;    // k < q
  bool under_resolved = false;
  std::vector<cplx> lhs;
};

inline double weighted_closed_form(int k, int q, int gamma, int n) {
  return std::pow(2 * kPi, n) / (sphere_area(n) * phi_norm_sq(k - q, gamma).get_d());
}

// phi_k x nu_t at the probes, fitted against the single-scalar shape.
inline WeightedFit weighted_functional_check(const FloatBigraded& P, int k, double t, const std::vector<Point>& probes,
                                             const SphereRuleOptions& nodes = {64, 32, 20000, 1}) {
  const int n = P.dim(), p = P.p(), q = P.q(), gamma = n + p + q;
  require(t > 0, "radius must be positive");
  SphereMeasureSpec spec{std::nullopt, t, nodes, P};
  SphereRule rule = make_sphere_rule(n, nodes);
  PointFunction f = phi_function(k, n);
  WeightedFit out;
  out.vanishing = k < q;
  for (const auto& z : probes) {
    auto r = twisted_spherical_mean(f, spec, rule, z);
    out.lhs.push_back(r.value);
    out.under_resolved = out.under_resolved || r.under_resolved;
    out.max_abs_lhs = std::max(out.max_abs_lhs, std::abs(r.value));
  }
  if (out.vanishing) return out;
  out.closed_form = weighted_closed_form(k, q, gamma, n);
  std::vector<cplx> shape;
  const double radial = std::pow(t, 2 * (p + q)) * phi_radial(k - q, gamma - 1.0, t);
  double ss = 0, ll = 0;
  cplx sl = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    cplx s = radial * P(probes[i]) * phi_radial(k - q, gamma - 1.0, probes[i].norm());
    shape.push_back(s);
    ss += std::norm(s);
    sl += std::conj(s) * out.lhs[i];
    ll += std::norm(out.lhs[i]);
  }
  if (ss <= 1e-24 * std::max(ll, 1.0)) throw precondition_error("probe set is degenerate: the fitted shape vanishes at every probe");
  out.constant = sl / ss;
  double rr = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) rr += std::norm(out.lhs[i] - out.constant * shape[i]);
  out.residual = ll > 0 ? std::sqrt(rr / ll) : 0;
  return out;
}

struct CalibratedConstant {
  double value = 0;
  double uncertainty = 0;  // max relative deviation across radii and probe sets
  double closed_form = 0;
  std::vector<double> samples;
  double max_fit_residual = 0;
};

// Fits K(k, p, q, n) over radii x two disjoint probe sets; throws calibration_error when the scatter is too large.
inline CalibratedConstant calibrate_constant(int k, int p, int q, int n, const std::vector<double>& radii = {0.73, 1.31, 1.87},
                                             double threshold = 1e-4) {
  if (k < q) throw precondition_error("calibration needs k >= q");
  auto basis = harmonic_basis(n, p, q);
  FloatBigraded P = basis.elements.front().to_floating();
  std::vector<std::vector<Point>> sets{default_probes(n, 1.5, 6, 101), default_probes(n, 1.5, 6, 202)};
  CalibratedConstant c;
  c.closed_form = weighted_closed_form(k, q, n + p + q, n);
  for (double t : radii)
    for (const auto& probes : sets) {
      auto fit = weighted_functional_check(P, k, t, probes);
      c.samples.push_back(fit.constant.real());
      c.max_fit_residual = std::max(c.max_fit_residual, fit.residual);
      if (std::abs(fit.constant.imag()) > threshold * std::abs(fit.constant))
        throw calibration_error("fitted constant is not real");
    }
  double mean = 0;
  for (double v : c.samples) mean += v;
  mean /= c.samples.size();
  c.value = mean;
  for (double v : c.samples) c.uncertainty = std::max(c.uncertainty, std::abs(v - mean) / std::abs(mean));
  if (c.uncertainty > threshold || c.max_fit_residual > threshold)
    throw calibration_error("calibration scatter above threshold");
  return c;
}

struct HeckeBochnerCheck {
  std::vector<Point> probes;
  std::vector<cplx> lhs, rhs;
  double rel_err = 0;
  double max_abs_lhs = 0;
  bool vanishing = false;  // k < p
  double calibrated = 0;
  double closed_form = 0;
};

// (a P) x phi_k^{n-1} against |S^{2n-1}| K P(z) phi_{k-p}^{g-1}(z) int a phi_{k-p}^{g-1} t^{2g-1} dt, where K is the
// weighted-mean constant of conj(P) (bidegree (q, p)), calibrated numerically.
inline HeckeBochnerCheck hecke_bochner_check(const std::function<double(double)>& a, const FloatBigraded& P, int k,
                                             const std::vector<Point>& probes, const GridGeometry& geo,
                                             const ConvolutionOptions& opts = {}, const RadialRule& radial = {},
                                             std::optional<double> constant = std::nullopt) {
  const int n = P.dim(), p = P.p(), q = P.q(), gamma = n + p + q;
  require(geo.n == n, "grid dimension mismatch");
  // decay check: a P must be negligible at the grid edge
  const double edge = std::abs(a(geo.L)) * std::pow(geo.L, p + q);
  double peak = 0;
  for (int i = 0; i <= 64; ++i) peak = std::max(peak, std::abs(a(geo.L * i / 64)) * std::pow(geo.L * i / 64, p + q));
  if (!(edge <= 1e-6 * std::max(peak, 1e-300)))
    throw precondition_error("radial profile does not decay fast enough for the grid truncation");
  CompiledPolynomial Pc(P.poly());
  PointFunction f = [&](const Point& w) { return a(w.norm()) * Pc(w); };
  GridFunction g = GridFunction::sample(geo, phi_function(k, n), "phi");
  HeckeBochnerCheck out{probes};
  out.lhs = twisted_convolution(f, g, 1.0, probes, opts);
  for (const auto& v : out.lhs) out.max_abs_lhs = std::max(out.max_abs_lhs, std::abs(v));
  out.vanishing = k < p;
  if (out.vanishing) {
    out.rhs.assign(probes.size(), 0.0);
    out.rel_err = out.max_abs_lhs;
    return out;
  }
  out.closed_form = weighted_closed_form(k, p, gamma, n);
  out.calibrated = constant ? *constant : calibrate_constant(k, q, p, n).value;
  QuadratureRule rule = radial.build();
  const double integral = radial_integral([&](double t) { return a(t) * phi_radial(k - p, gamma - 1.0, t); }, 2 * gamma - 1, rule);
  const double factor = sphere_area(n) * out.calibrated * integral;
  for (const auto& z : probes) out.rhs.push_back(factor * Pc(z) * phi_radial(k - p, gamma - 1.0, z.norm()));
  out.rel_err = relative_error(out.lhs, out.rhs);
  return out;
}

struct HeisenbergDemo {
  double residual = 0;  // max |group side - twisted side| / max |twisted side|
  double max_abs = 0;
  int slices = 0;
};

struct HeisenbergOptions {
  int nz = 16;       // z nodes per axis
  double lz = 4.0;   // z grid on [-lz, lz)
  double T = 5.0;    // t slices on [-T, T]
  int slices = 17;
  double lambda = 1.0;
  // probe z nodes as index offsets from the centre node; empty means every node with |coordinate| <= lz / 2
  std::vector<std::pair<int, int>> probe_offsets;
};

// Group convolution on the slice grid C x [-T, T], partial Fourier transform at lambda, versus the twisted
// convolution of the transformed slices; probes are the z nodes with |coordinate| <= lz / 2.
inline HeisenbergDemo heisenberg_slice_demo(const std::function<cplx(cplx, double)>& f,
                                            const std::function<cplx(cplx, double)>& g, const HeisenbergOptions& o = {}) {
  if (o.nz > 32 || o.slices > 33) throw guardrail_error("Heisenberg demo is limited to 32 nodes per axis and 33 slices");
  require(o.nz >= 4 && o.nz % 2 == 0 && o.slices >= 3 && o.lz > 0 && o.T > 0, "invalid demo grid");
  GridGeometry geo{1, o.lz, o.nz};
  const double h = geo.h(), dt = 2 * o.T / (o.slices - 1);
  auto tnode = [&](int m) { return -o.T + m * dt; };
  const int N = o.nz, S = o.slices;
  // samples[m][i][j] at z = x_i + i x_j, t = t_m
  auto sample = [&](const std::function<cplx(cplx, double)>& F) {
    std::vector<cplx> v(static_cast<std::size_t>(S) * N * N);
    for (int m = 0; m < S; ++m)
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) v[(m * N + i) * N + j] = F({geo.node(i), geo.node(j)}, tnode(m));
    return v;
  };
  const auto fs = sample(f), gs = sample(g);
  auto trap = [&](int m) { return (m == 0 || m == S - 1) ? dt / 2 : dt; };
  auto slice = [&](const std::vector<cplx>& v) {
    GridFunction out{geo, std::vector<cplx>(static_cast<std::size_t>(N) * N), "slice"};
    for (int m = 0; m < S; ++m) {
      cplx e = std::polar(trap(m), o.lambda * tnode(m));
      for (int c = 0; c < N * N; ++c) out.samples[c] += v[m * N * N + c] * e;
    }
    return out;
  };
  // f at (node (i, j), t) with linear interpolation in t, zero outside the sampled box
  auto f_at = [&](int i, int j, double t) -> cplx {
    if (i < 0 || j < 0 || i >= N || j >= N) return 0.0;
    const double s = (t + o.T) / dt;
    if (s < 0 || s > S - 1) return 0.0;
    int m = std::min(static_cast<int>(std::floor(s)), S - 2);
    double th = s - m;
    return (1 - th) * fs[(m * N + i) * N + j] + th * fs[((m + 1) * N + i) * N + j];
  };
  std::vector<std::pair<int, int>> probe_idx;
  std::vector<Point> probes;
  auto usable = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < N && j < N && std::abs(geo.node(i)) <= o.lz / 2 && std::abs(geo.node(j)) <= o.lz / 2;
  };
  if (o.probe_offsets.empty()) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (usable(i, j)) probe_idx.push_back({i, j});
  } else {
    for (const auto& [di, dj] : o.probe_offsets) {
      if (!usable(N / 2 + di, N / 2 + dj)) throw precondition_error("demo probe lies outside the central half of the grid");
      probe_idx.push_back({N / 2 + di, N / 2 + dj});
    }
  }
  for (const auto& [i, j] : probe_idx) probes.push_back(Point{cplx(geo.node(i), geo.node(j))});
  std::vector<cplx> group(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto [pi, pj] = probe_idx[p];
    const cplx z = probes[p][0];
    cplx acc = 0;
    for (int m = 0; m < S; ++m) {
      const double t = tnode(m);
      cplx conv = 0;
      // (z, t)(-w, -s) = (z - w, t - s - Im(z conj w) / 2); z - w is a node since z is
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
          const cplx w(geo.node(a), geo.node(b));
          const double tw = 0.5 * std::imag(z * std::conj(w));
          // node index of z - w: (x_pi - x_a + L) / h = pi - a + N/2
          const int ii = pi - a + N / 2, jj = pj - b + N / 2;
          for (int s = 0; s < S; ++s) {
            const cplx gv = gs[(s * N + a) * N + b];
            if (gv == cplx(0)) continue;
            conv += f_at(ii, jj, t - tnode(s) - tw) * gv * trap(s);
          }
        }
      acc += conv * h * h * std::polar(trap(m), o.lambda * t);
    }
    group[p] = acc;
  }
  std::vector<cplx> twisted = twisted_convolution(slice(fs), slice(gs), o.lambda, probes, {1, 1 << 20});
  HeisenbergDemo out;
  out.slices = S;
  for (const auto& v : twisted) out.max_abs = std::max(out.max_abs, std::abs(v));
  double num = 0;
  for (std::size_t p = 0; p < probes.size(); ++p) num = std::max(num, std::abs(group[p] - twisted[p]));
  out.residual = out.max_abs > 0 ? num / out.max_abs : num;
  return out;
}

// Direct ordinary convolution on the grid (node-aligned z), the lambda = 0 reference.
inline std::vector<cplx> ordinary_convolution(const GridFunction& f, const GridFunction& g, const std::vector<Point>& zs) {
  require(f.geometry == g.geometry && f.geometry.n == 1, "ordinary convolution reference is for n = 1 grids");
  const GridGeometry& geo = f.geometry;
  const int N = geo.steps;
  std::vector<cplx> out;
  for (const auto& z : zs) {
    detail::check_probe(geo, z);
    const int zi = static_cast<int>(std::lround((z[0].real() + geo.L) / geo.h()));
    const int zj = static_cast<int>(std::lround((z[0].imag() + geo.L) / geo.h()));
    require(std::abs(geo.node(zi) - z[0].real()) < 1e-9 && std::abs(geo.node(zj) - z[0].imag()) < 1e-9,
            "reference convolution needs node-aligned points");
    cplx s = 0;
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) {
        const int ii = zi - a + N / 2, jj = zj - b + N / 2;
        if (ii < 0 || jj < 0 || ii >= N || jj >= N) continue;
        s += f.samples[ii * N + jj] * g.samples[a * N + b];
      }
    out.push_back(s * geo.h() * geo.h());
  }
  return out;
}

}  // namespace hbl
