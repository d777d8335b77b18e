#pragma once

#include <cmath>
#include <vector>

#include "iflux/iflux.hpp"

namespace testutil {

using namespace iflux;

inline FieldSource::PolyCoeffs zero_coeffs() {
  FieldSource::PolyCoeffs c{};
  for (auto& row : c) row.fill(0.0);
  return c;
}

// Random polynomial field of total degree <= 2 with coefficients in
// [-scale, scale].
inline FieldSource random_polynomial(Rng& rng, double scale, const Box3& box = Box3{}) {
  auto c = zero_coeffs();
  for (auto& row : c)
    for (auto& v : row) v = rng.uniform(-scale, scale);
  return FieldSource::polynomial(c, box);
}

// Grid field sampling a random polynomial (so it is exactly trilinear on
// linear data but generally rough).
inline FieldSource random_grid_field(Rng& rng, int n, double scale, const Box3& box = Box3{}) {
  VectorGrid g;
  g.spec.origin = box.lo;
  g.spec.dims = {n, n, n};
  const Vec3 ext = box.extent();
  g.spec.spacing = {ext.x / (n - 1), ext.y / (n - 1), ext.z / (n - 1)};
  g.samples.resize(3 * g.spec.node_count());
  for (auto& s : g.samples) s = rng.uniform(-scale, scale);
  return FieldSource::grid(std::move(g));
}

// gradient field of g(x) = sum of linear/quadratic monomials: always a
// valid polynomial test field.
inline FieldSource gradient_test_field(const Vec3& lin, const std::array<double, 6>& quad,
                                       const Box3& box = Box3{}) {
  // g = lin.x * x + ... + quad[0] x^2 + quad[1] y^2 + quad[2] z^2
  //     + quad[3] xy + quad[4] xz + quad[5] yz
  auto c = zero_coeffs();
  // d/dx: lin.x + 2 quad[0] x + quad[3] y + quad[4] z
  c[0][0] = lin.x;
  c[0][1] = 2 * quad[0];
  c[0][2] = quad[3];
  c[0][3] = quad[4];
  c[1][0] = lin.y;
  c[1][2] = 2 * quad[1];
  c[1][1] = quad[3];
  c[1][3] = quad[5];
  c[2][0] = lin.z;
  c[2][3] = 2 * quad[2];
  c[2][1] = quad[4];
  c[2][2] = quad[5];
  return FieldSource::polynomial(c, box);
}

inline double gradient_test_potential(const Vec3& lin, const std::array<double, 6>& quad,
                                      const Vec3& x) {
  return lin.x * x.x + lin.y * x.y + lin.z * x.z + quad[0] * x.x * x.x + quad[1] * x.y * x.y +
         quad[2] * x.z * x.z + quad[3] * x.x * x.y + quad[4] * x.x * x.z + quad[5] * x.y * x.z;
}

// Closed-form shell energy of the monopole: (4 pi)^{1-p} int_a^b r^{2-2p} dr.
inline double monopole_shell_energy(double p, double a, double b) {
  const double e = 3.0 - 2.0 * p;
  const double radial = e == 0.0 ? std::log(b / a) : (std::pow(b, e) - std::pow(a, e)) / e;
  return std::pow(4.0 * kPi, 1.0 - p) * radial;
}

inline double monopole_shell_norm(double p, double a, double b) {
  return std::pow(monopole_shell_energy(p, a, b), 1.0 / p);
}

}  // namespace testutil
