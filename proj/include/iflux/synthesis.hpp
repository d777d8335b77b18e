#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/field.hpp"
#include "iflux/lp_norm.hpp"
#include "iflux/measures.hpp"

namespace iflux {

// --- dipole integrals in segment-adapted coordinates -----------------------
//
// With u the axial distance from the nearer apex and s the transverse offset
// scaled to the unit ball, the field is c(u) (e +- y/u) with
// c(u) = (eps/rho)^(n-1) / (|B^{n-1}_1| u^(n-1)); both the L^p energy and
// pairings against smooth tests reduce to low-dimensional integrals whose
// u-dependence is an exact power law. This avoids resolving thin capsules on
// a global grid.

namespace detail {

// int_{B^{n-1}} (1 + lambda^2 |s|^2)^{p/2} ds by Gauss quadrature.
inline double transverse_moment(int n, double lambda, double p) {
  const GaussRule g = gauss_legendre(48, 0.0, 1.0);
  double acc = 0.0;
  if (n == 3) {
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double s = g.nodes[i];
      acc += g.weights[i] * std::pow(1.0 + lambda * lambda * s * s, 0.5 * p) * s;
    }
    return 2.0 * kPi * acc;
  }
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double s = g.nodes[i];
    acc += g.weights[i] * std::pow(1.0 + lambda * lambda * s * s, 0.5 * p);
  }
  return 2.0 * acc;  // even integrand on [-1, 1]
}

}  // namespace detail

// Integral of |X|^p over the support of the dipole (the p-th power).
inline double dipole_lp_energy(const DipoleSpec& spec, double p) {
  spec.validate();
  if (!(p > 0.0)) throw Error("dipole_lp_energy: p must be positive");
  const int n = spec.n;
  const double eps = spec.half_length();
  const double rho = spec.transverse_radius();
  const double lambda = rho / eps;
  const double ball = (n == 3) ? kPi : 2.0;  // |B^{n-1}_1|
  const double amp = std::pow(eps / rho, n - 1) / ball;  // c(u) = amp / u^{n-1}
  const double axial_exponent = (n - 1) * (1.0 - p);     // u^{n-1-(n-1)p} du
  if (axial_exponent <= -1.0)
    throw NonFiniteError("dipole_lp_energy: not integrable at this exponent (p >= n/(n-1))");
  const double axial = std::pow(eps, axial_exponent + 1.0) / (axial_exponent + 1.0);
  const double cross = detail::transverse_moment(n, lambda, p);
  return 2.0 * std::pow(lambda, n - 1) * std::pow(amp, p) * cross * axial;
}

// Pairing <X, A> = int X . A against a smooth (polynomial) test field,
// integrated exactly in adapted coordinates. For the dipole construction
// this equals g(a) - g(b) whenever A = grad g.
inline double dipole_pairing(const DipoleSpec& spec, const FieldSource& test) {
  spec.validate();
  const double eps = spec.half_length();
  const double rho = spec.transverse_radius();
  const double lambda = rho / eps;
  const Vec3 axis = (spec.a - spec.b).normalized();
  // orthonormal transverse frame
  Vec3 e1 = std::abs(axis.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  e1 = (e1 - axis * e1.dot(axis)).normalized();
  const Vec3 e2 = axis.cross(e1);

  const GaussRule gu = gauss_legendre(8, 0.0, eps);
  double acc = 0.0;
  if (spec.n == 3) {
    const GaussRule gs = gauss_legendre(6, 0.0, 1.0);
    const int nphi = 8;
    for (std::size_t iu = 0; iu < gu.nodes.size(); ++iu) {
      const double u = gu.nodes[iu];
      for (std::size_t is = 0; is < gs.nodes.size(); ++is) {
        const double s = gs.nodes[is];
        for (int j = 0; j < nphi; ++j) {
          const double phi = 2.0 * kPi * (j + 0.5) / nphi;
          const Vec3 sdir = e1 * std::cos(phi) + e2 * std::sin(phi);
          const double w = gu.weights[iu] * gs.weights[is] * s * (2.0 * kPi / nphi) / kPi;
          const Vec3 y = sdir * (rho * u / eps * s);
          // source half (apex b): X parallel to (axis + lambda s sdir)
          acc += w * (axis + sdir * (lambda * s)).dot(test.eval_raw(spec.b + axis * u + y));
          // sink half (apex a)
          acc += w * (axis - sdir * (lambda * s)).dot(test.eval_raw(spec.a - axis * u + y));
        }
      }
    }
    return acc;
  }
  // n == 2: planar capsule, per unit length in z
  const GaussRule gs = gauss_legendre(8, -1.0, 1.0);
  const Vec3 et = axis.cross(Vec3{0, 0, 1});  // in-plane transverse direction
  for (std::size_t iu = 0; iu < gu.nodes.size(); ++iu) {
    const double u = gu.nodes[iu];
    for (std::size_t is = 0; is < gs.nodes.size(); ++is) {
      const double s = gs.nodes[is];
      const double w = gu.weights[iu] * gs.weights[is] * 0.5;
      const Vec3 y = et * (rho * u / eps * s);
      acc += w * (axis + et * (lambda * s)).dot(test.eval_raw(spec.b + axis * u + y));
      acc += w * (axis - et * (lambda * s)).dot(test.eval_raw(spec.a - axis * u + y));
    }
  }
  return acc;
}

inline bool dipole_capsule_contains(const DipoleSpec& spec, const Vec3& x) {
  const double eps = spec.half_length();
  const double rho = spec.transverse_radius();
  Vec3 rel = x - spec.b;
  if (spec.n == 2) rel.z = 0.0;
  const Vec3 axis = (spec.a - spec.b).normalized();
  const double ub = rel.dot(axis);
  if (ub <= 0.0 || ub >= 2.0 * eps) return false;
  const double u = ub <= eps ? ub : 2.0 * eps - ub;
  return (rel - axis * ub).norm() <= rho * u / eps;
}

// --- weak pairing -----------------------------------------------------------

namespace detail {

inline void require_polynomial_test(const FieldSource& test) {
  switch (test.kind()) {
    case FieldSource::Kind::Constant:
    case FieldSource::Kind::Polynomial:
      return;
    case FieldSource::Kind::Sum: {
      for (const auto& t : *test.as_sum()) require_polynomial_test(*t.field);
      return;
    }
    default:
      throw Error("weak_pairing: test field must be polynomial (total degree <= 2)");
  }
}

}  // namespace detail

struct PairingOptions {
  int resolution = 24;
  LpOptions refine;
};

// int X . A over the field's box. Dipole parts integrate in adapted
// coordinates; everything else by composite midpoint with dyadic refinement
// around singular loci.
inline double weak_pairing(const FieldSource& field, const FieldSource& test,
                           const PairingOptions& opts = {}) {
  detail::require_polynomial_test(test);
  if (const auto* terms = field.as_sum()) {
    double acc = 0.0;
    for (const auto& t : *terms) acc += t.coeff * weak_pairing(*t.field, test, opts);
    return acc;
  }
  if (const auto* d = field.as_dipole()) return dipole_pairing(*d, test);
  auto integrand = [&](const Vec3& x) { return field.eval_raw(x).dot(test.eval_raw(x)); };
  return detail::integrate_box_refined(integrand, field.domain(), opts.resolution,
                                       field.singularities(), opts.refine);
}

// --- the segment lattices S_k and the counterexample families ---------------

struct LatticeSpec {
  int k = 1;

  long long points_per_axis() const { return (1ll << k) - 1; }
  long long segment_count() const {
    const long long m = points_per_axis();
    return m * m * m;
  }
  double spacing() const { return std::pow(0.5, k); }
  double half_length() const { return std::pow(0.5, 3 * k + 1); }

  void validate(long long cap) const {
    if (k < 1) throw Error("LatticeSpec: k must be >= 1");
    if (k > 15) throw ResourceLimitError("LatticeSpec: k too large for exact arithmetic");
    if (segment_count() > cap)
      throw ResourceLimitError("segment_lattice: segment count exceeds the configured cap");
  }
};

inline constexpr long long kDefaultSegmentCap = 2'000'000;

// Axis-aligned unit-multiplicity segments with centers on 2^-k Z^3 in the
// open unit cube and half-length 2^-(3k+1), oriented along +x.
inline PolylineCurrent segment_lattice(int k, long long cap = kDefaultSegmentCap) {
  LatticeSpec spec{k};
  spec.validate(cap);
  PolylineCurrent current;
  current.segments.reserve(static_cast<std::size_t>(spec.segment_count()));
  const double h = spec.spacing();
  const double hl = spec.half_length();
  const long long m = spec.points_per_axis();
  for (long long kz = 1; kz <= m; ++kz)
    for (long long ky = 1; ky <= m; ++ky)
      for (long long kx = 1; kx <= m; ++kx) {
        const Vec3 c{h * kx, h * ky, h * kz};
        current.segments.push_back({c - Vec3{hl, 0, 0}, c + Vec3{hl, 0, 0}, 1});
      }
  return current;
}

// Exact mass of the lattice current: (2^k - 1)^3 / 2^{3k}.
inline Rational lattice_mass_exact(int k) {
  LatticeSpec spec{k};
  if (k < 1 || k > 15) throw Error("lattice_mass_exact: k out of range");
  const long long m = spec.points_per_axis();
  return Rational::make(m * m * m, 1ll << (3 * k));
}

// Vector-valued measure: one scalar measure (atoms + optional density) per
// axis. Signed parts are split automatically, giving at most six dipole
// families (axis x sign).
struct VectorMeasure {
  std::array<AtomicMeasure, 3> comp;

  static VectorMeasure uniform(const Vec3& value) {
    VectorMeasure m;
    for (int axis = 0; axis < 3; ++axis) {
      if (value[axis] == 0.0) continue;
      ScalarGrid g;
      g.spec.origin = {0, 0, 0};
      g.spec.spacing = {1, 1, 1};
      g.spec.dims = {2, 2, 2};
      g.samples.assign(8, value[axis]);
      m.comp[axis].densities.push_back(std::move(g));
    }
    return m;
  }
};

struct CounterexampleField {
  int k = 1;
  PolylineCurrent current;
  std::vector<DipoleSpec> dipoles;      // disjoint supports by construction
  FieldSource field;                    // sum of the dipole fields on [0,1]^3
  std::optional<Rational> exact_mass;   // set for the lattice construction

  CounterexampleField() : field(FieldSource::constant({0, 0, 0})) {}
};

namespace detail {

inline FieldSource assemble_dipole_sum(const std::vector<DipoleSpec>& dipoles) {
  const Box3 unit{{0, 0, 0}, {1, 1, 1}};
  if (dipoles.empty()) return FieldSource::constant({0, 0, 0}, unit);
  std::vector<FieldSource::Term> terms;
  terms.reserve(dipoles.size());
  for (const auto& d : dipoles)
    terms.push_back({1.0, std::make_shared<FieldSource>(FieldSource::dipole(d, unit))});
  return FieldSource::sum(std::move(terms));
}

// dipole for an oriented segment: flow start -> end means source at start,
// sink at end, so spec.a = end and spec.b = start.
inline DipoleSpec segment_dipole(const Vec3& start, const Vec3& end) {
  DipoleSpec d;
  d.a = end;
  d.b = start;
  d.n = 3;
  return d;
}

}  // namespace detail

// The model construction: one unit dipole per lattice segment.
inline CounterexampleField counterexample_lattice(int k, long long cap = kDefaultSegmentCap) {
  CounterexampleField out;
  out.k = k;
  out.current = segment_lattice(k, cap);
  out.exact_mass = lattice_mass_exact(k);
  out.dipoles.reserve(out.current.segments.size());
  for (const auto& s : out.current.segments)
    out.dipoles.push_back(detail::segment_dipole(s.start, s.end));
  out.field = detail::assemble_dipole_sum(out.dipoles);
  return out;
}

// Density construction: the 2^{3k} dyadic cubes of side 2^-k tile the unit
// cube; each carries a segment through its center with length equal to the
// cell measure of the component, oriented along the axis and by the sign.
inline CounterexampleField counterexample_density(int k, const VectorMeasure& measure,
                                                  long long cap = kDefaultSegmentCap) {
  if (k < 1 || k > 12) throw Error("counterexample_density: k out of range");
  for (int axis = 0; axis < 3; ++axis)
    if (measure.comp[axis].total_variation() > 1.0 + 1e-9)
      throw Error("counterexample_density: component total variation exceeds 1");
  CounterexampleField out;
  out.k = k;
  const long long m = 1ll << k;
  if (m * m * m > cap)
    throw ResourceLimitError("counterexample_density: cube count exceeds the configured cap");
  const double h = std::pow(0.5, k);
  const double cell_vol = h * h * h;
  for (int axis = 0; axis < 3; ++axis) {
    const AtomicMeasure& comp = measure.comp[axis];
    if (comp.atoms.empty() && comp.densities.empty()) continue;
    Vec3 dir{0, 0, 0};
    dir[axis] = 1.0;
    for (long long kz = 0; kz < m; ++kz)
      for (long long ky = 0; ky < m; ++ky)
        for (long long kx = 0; kx < m; ++kx) {
          const Vec3 c{h * (kx + 0.5), h * (ky + 0.5), h * (kz + 0.5)};
          double dens = 0.0;
          for (const auto& d : comp.densities)
            if (d.spec.box().contains(c)) dens += d.interpolate(c) * cell_vol;
          double plus = std::max(dens, 0.0), minus = std::max(-dens, 0.0);
          for (const auto& a : comp.atoms) {
            const Vec3 rel = a.point - c;
            if (std::abs(rel.x) <= 0.5 * h && std::abs(rel.y) <= 0.5 * h &&
                std::abs(rel.z) <= 0.5 * h) {
              if (a.weight > 0)
                plus += a.weight;
              else
                minus -= a.weight;
            }
          }
          for (int sign = 0; sign < 2; ++sign) {
            const double len = sign == 0 ? plus : minus;
            if (len <= 0.0) continue;
            const Vec3 step = dir * (0.5 * len * (sign == 0 ? 1.0 : -1.0));
            const Vec3 start = c - step, end = c + step;
            out.current.segments.push_back({start, end, 1});
            out.dipoles.push_back(detail::segment_dipole(start, end));
            if (static_cast<long long>(out.dipoles.size()) > cap)
              throw ResourceLimitError("counterexample_density: segment count exceeds the cap");
          }
        }
  }
  out.field = detail::assemble_dipole_sum(out.dipoles);
  return out;
}

// Sum of per-dipole energies; valid because the supports are disjoint.
inline double dipole_sum_lp_energy(const std::vector<DipoleSpec>& dipoles, double p) {
  double acc = 0.0;
  for (const auto& d : dipoles) acc += dipole_lp_energy(d, p);
  return acc;
}

// Empirical superposition count at a point (the signed construction
// guarantees at most 6).
inline int capsule_overlap_count(const std::vector<DipoleSpec>& dipoles, const Vec3& x) {
  int count = 0;
  for (const auto& d : dipoles)
    if (dipole_capsule_contains(d, x)) ++count;
  return count;
}

}  // namespace iflux
