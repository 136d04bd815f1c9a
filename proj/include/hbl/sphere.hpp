#pragma once

#include <random>
#include <vector>

#include "hbl/quadrature.hpp"

namespace hbl {

// Nodes on the unit sphere S^{2n-1} with weights summing to 1 (normalized surface measure).
struct SphereRule {
  int n = 1;
  std::vector<Point> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

struct SphereRuleOptions {
  int n_theta = 24;  // trapezoid nodes per circle factor
  int n_eta = 24;    // Gauss-Legendre nodes in the latitude (n = 2)
  int samples = 20000;  // random nodes for n >= 3
  std::uint64_t seed = 1;
};

// Uniform random points on S^{2n-1}, equal weights.
inline SphereRule random_sphere_points(int n, int count, std::uint64_t seed) {
  require(n >= 1 && n <= kMaxDim && count >= 1, "invalid random sphere request");
  SphereRule r;
  r.n = n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (int i = 0; i < count; ++i) {
    Point p(n);
    for (int j = 0; j < n; ++j) p[j] = {g(rng), g(rng)};
    r.nodes.push_back(p * (1.0 / p.norm()));
    r.weights.push_back(1.0 / count);
  }
  return r;
}

// n = 1: trapezoid on the circle; n = 2: z = (cos(eta) e^{i t1}, sin(eta) e^{i t2}) with
// Gauss-Legendre in eta (weight sin 2eta) and trapezoid in t1, t2; n >= 3: seeded random points.
inline SphereRule make_sphere_rule(int n, const SphereRuleOptions& o = {}) {
  require(n >= 1 && n <= kMaxDim, "dimension out of range");
  if (n >= 3) return random_sphere_points(n, o.samples, o.seed);
  require(o.n_theta >= 1 && o.n_eta >= 1, "sphere rule needs positive node counts");
  SphereRule r;
  r.n = n;
  const int m = o.n_theta;
  if (n == 1) {
    for (int i = 0; i < m; ++i) {
      r.nodes.push_back(Point{std::polar(1.0, 2 * kPi * i / m)});
      r.weights.push_back(1.0 / m);
    }
    return r;
  }
  QuadratureRule eta = gauss_legendre(o.n_eta, 0.0, kPi / 2);
  for (std::size_t e = 0; e < eta.size(); ++e) {
    const double c = std::cos(eta.nodes[e]), s = std::sin(eta.nodes[e]);
    const double we = eta.weights[e] * std::sin(2 * eta.nodes[e]) / (double(m) * m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        r.nodes.push_back(Point{std::polar(c, 2 * kPi * a / m), std::polar(s, 2 * kPi * b / m)});
        r.weights.push_back(we);
      }
  }
  return r;
}

}  // namespace hbl
