#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/grid.hpp"
#include "iflux/vec3.hpp"

namespace iflux {

// Reduced fraction with 64-bit terms; enough for the dyadic lattice masses.
struct Rational {
  long long num = 0;
  long long den = 1;

  static Rational make(long long n, long long d) {
    if (d == 0) throw Error("Rational: zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const long long g = std::gcd(n < 0 ? -n : n, d);
    return {g ? n / g : n, g ? d / g : d};
  }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const { return std::to_string(num) + "/" + std::to_string(den); }
};

// Finite list of weighted Dirac atoms plus an optional grid density.
struct AtomicMeasure {
  struct Atom {
    Vec3 point;
    double weight;
  };
  std::vector<Atom> atoms;
  std::vector<ScalarGrid> densities;  // empty or one entry in practice

  double total_variation() const {
    double tv = 0.0;
    for (const auto& a : atoms) tv += std::abs(a.weight);
    for (const auto& d : densities) {
      // midpoint over grid cells of the trilinear interpolant
      const auto& g = d.spec;
      for (int k = 0; k + 1 < g.dims[2]; ++k)
        for (int j = 0; j + 1 < g.dims[1]; ++j)
          for (int i = 0; i + 1 < g.dims[0]; ++i) {
            const Vec3 c = g.node(i, j, k) + g.spacing * 0.5;
            tv += std::abs(d.interpolate(c)) * g.spacing.x * g.spacing.y * g.spacing.z;
          }
    }
    return tv;
  }

  // Sum weights of coincident points (within tol) into single atoms.
  AtomicMeasure merged(double tol = 1e-12) const {
    AtomicMeasure out;
    out.densities = densities;
    for (const auto& a : atoms) {
      bool found = false;
      for (auto& b : out.atoms)
        if ((a.point - b.point).norm() <= tol) {
          b.weight += a.weight;
          found = true;
          break;
        }
      if (!found) out.atoms.push_back(a);
    }
    out.atoms.erase(std::remove_if(out.atoms.begin(), out.atoms.end(),
                                   [](const Atom& a) { return a.weight == 0.0; }),
                    out.atoms.end());
    return out;
  }
};

// Integer-multiplicity 1-current carried by oriented segments.
struct PolylineCurrent {
  struct Segment {
    Vec3 start;
    Vec3 end;
    long long multiplicity = 1;
  };
  std::vector<Segment> segments;

  // mass = sum |m| * length
  double mass() const {
    double acc = 0.0;
    for (const auto& s : segments)
      acc += static_cast<double>(std::llabs(s.multiplicity)) * (s.end - s.start).norm();
    return acc;
  }

  // boundary = sum m * (delta_end - delta_start), coincident points merged.
  AtomicMeasure boundary(double merge_tol = 1e-12) const {
    AtomicMeasure m;
    m.atoms.reserve(2 * segments.size());
    for (const auto& s : segments) {
      m.atoms.push_back({s.end, static_cast<double>(s.multiplicity)});
      m.atoms.push_back({s.start, -static_cast<double>(s.multiplicity)});
    }
    return m.merged(merge_tol);
  }

  // Total variation of the boundary before cancellation-by-merge would be
  // 2 * sum |m|; after merging it is the mass of div of the dipole sum.
  double boundary_mass(double merge_tol = 1e-12) const {
    const AtomicMeasure b = boundary(merge_tol);
    double acc = 0.0;
    for (const auto& a : b.atoms) acc += std::abs(a.weight);
    return acc;
  }
};

}  // namespace iflux
