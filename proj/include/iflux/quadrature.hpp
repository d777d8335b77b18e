#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/vec3.hpp"

namespace iflux {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kFourPi = 4.0 * kPi;

// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-based initial guess, then Newton.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// Map Gauss rule to [a, b].
inline GaussRule gauss_legendre(int n, double a, double b) {
  GaussRule unit = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    unit.nodes[i] = mid + half * unit.nodes[i];
    unit.weights[i] *= half;
  }
  return unit;
}

// Product quadrature on S^2: Gauss-Legendre in cos(theta) x uniform
// trapezoid in phi. Order n gives n polar rings with 2n azimuthal nodes and
// integrates spherical harmonics exactly through degree 2n-1. Weights are
// solid-angle weights and sum to 4*pi.
struct SphereQuadrature {
  int order = 0;
  std::vector<Vec3> nodes;      // unit vectors
  std::vector<double> weights;  // positive, sum 4*pi

  std::size_t size() const { return nodes.size(); }
  int exact_degree() const { return 2 * order - 1; }
};

inline SphereQuadrature sphere_quadrature(int order) {
  if (order < 1) throw Error("sphere_quadrature: order must be >= 1");
  SphereQuadrature q;
  q.order = order;
  const int n_phi = 2 * order;
  const GaussRule polar = gauss_legendre(order);  // nodes are cos(theta)
  const double dphi = 2.0 * kPi / n_phi;
  q.nodes.reserve(static_cast<std::size_t>(order) * n_phi);
  q.weights.reserve(static_cast<std::size_t>(order) * n_phi);
  for (int i = 0; i < order; ++i) {
    const double ct = polar.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = dphi * j;
      q.nodes.push_back({st * std::cos(phi), st * std::sin(phi), ct});
      q.weights.push_back(polar.weights[i] * dphi);
    }
  }
  return q;
}

}  // namespace iflux
