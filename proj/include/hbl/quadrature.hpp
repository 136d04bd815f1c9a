#pragma once

#include <functional>
#include <vector>

#include "hbl/core.hpp"

namespace hbl {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre rule on [-1, 1] by Newton iteration on the three-term recurrence.
inline QuadratureRule gauss_legendre(int m) {
  require(m >= 1, "Gauss-Legendre needs at least one node");
  QuadratureRule rule;
  rule.nodes.assign(m, 0.0);
  rule.weights.assign(m, 0.0);
  if (m == 1) {
    rule.weights[0] = 2.0;
    return rule;
  }
  // returns P_m(x) and P_m'(x)
  auto legendre = [m](double x) {
    double p0 = 1, p1 = x;
    for (int k = 2; k <= m; ++k) {
      double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, m * (x * p1 - p0) / (x * x - 1)};
  };
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (m + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre(x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double dp = legendre(x).second;
    double w = 2.0 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[m - 1 - i] = x;
    rule.weights[i] = rule.weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

// Gauss-Legendre rule mapped to [a, b].
inline QuadratureRule gauss_legendre(int m, double a, double b) {
  QuadratureRule r = gauss_legendre(m);
  const double h = (b - a) / 2, c = (a + b) / 2;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r.nodes[i] = c + h * r.nodes[i];
    r.weights[i] *= h;
  }
  return r;
}

// Composite Gauss-Legendre on [0, r_max] for integrals over r in [0, inf) of Gaussian-decaying integrands.
struct RadialRule {
  double r_max = 16.0;
  int panels = 16;
  int per_panel = 16;

  QuadratureRule build() const {
    require(r_max > 0 && panels >= 1 && per_panel >= 1, "invalid radial rule");
    QuadratureRule out;
    const double h = r_max / panels;
    for (int p = 0; p < panels; ++p) {
      QuadratureRule g = gauss_legendre(per_panel, p * h, (p + 1) * h);
      out.nodes.insert(out.nodes.end(), g.nodes.begin(), g.nodes.end());
      out.weights.insert(out.weights.end(), g.weights.begin(), g.weights.end());
    }
    return out;
  }

  RadialRule refined() const { return {r_max, panels * 2, per_panel}; }
};

// Truncation radius with exp(-decay r^2) below tol, padded for polynomial growth up to degree.
inline double gaussian_cutoff(double decay, double tol = 1e-16, int degree = 0) {
  require(decay > 0, "decay rate must be positive");
  double r = std::sqrt(-std::log(tol) / decay);
  for (int it = 0; it < 50; ++it) {
    double rn = std::sqrt((-std::log(tol) + degree * std::log(std::max(r, 1.0))) / decay);
    if (std::abs(rn - r) < 1e-9) break;
    r = rn;
  }
  return r;
}

// int_0^r_max F(r) r^power dr
inline double radial_integral(const std::function<double(double)>& F, int power, const QuadratureRule& rule) {
  double s = 0;
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * F(rule.nodes[i]) * std::pow(rule.nodes[i], power);
  return s;
}

}  // namespace hbl
