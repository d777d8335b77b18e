#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/field.hpp"
#include "iflux/quadrature.hpp"

namespace iflux {

struct BoxRegion {
  Box3 box;
};

// Spherical shell r_min <= |x - center| <= r_max.
struct ShellRegion {
  Vec3 center;
  double r_min = 0.0;
  double r_max = 0.0;
};

using Region = std::variant<BoxRegion, ShellRegion>;

struct LpOptions {
  int max_refine_depth = 12;
  double divergence_bound = 1e9;  // partial sums beyond this -> NonFinite
  double tail_ratio_cap = 0.97;   // level-to-level ratio at max depth beyond this -> NonFinite
};

namespace detail {

inline bool locus_intersects_box(const SingularLocus& s, const Box3& cell) {
  // Conservative: distance from locus to the cell center vs cell circumradius.
  const Vec3 half = cell.extent() * 0.5;
  const double circ = half.norm();
  return s.distance(cell.center()) <= circ;
}

// Composite midpoint rule over a box with dyadic refinement of cells that
// meet a singular locus. Cells still singular at the maximum depth get a
// geometric tail estimate from the decay of the per-level sums; failure to
// decay means the integrand is not integrable at the requested exponent.
template <typename F>
double integrate_box_refined(const F& integrand, const Box3& box, int resolution,
                             const std::vector<SingularLocus>& loci, const LpOptions& opts) {
  if (resolution < 1) throw Error("integrate_box_refined: resolution must be >= 1");
  const Vec3 ext = box.extent();
  const Vec3 h = ext / static_cast<double>(resolution);
  const double cell_vol = h.x * h.y * h.z;

  double total = 0.0;
  std::vector<Box3> singular_cells;
  for (int k = 0; k < resolution; ++k)
    for (int j = 0; j < resolution; ++j)
      for (int i = 0; i < resolution; ++i) {
        Box3 cell{{box.lo.x + h.x * i, box.lo.y + h.y * j, box.lo.z + h.z * k},
                  {box.lo.x + h.x * (i + 1), box.lo.y + h.y * (j + 1), box.lo.z + h.z * (k + 1)}};
        bool singular = false;
        for (const auto& s : loci)
          if (locus_intersects_box(s, cell)) {
            singular = true;
            break;
          }
        if (singular) {
          singular_cells.push_back(cell);
        } else {
          total += integrand(cell.center()) * cell_vol;
        }
      }

  if (singular_cells.empty()) return total;

  double prev_abs = 0.0, last_abs = 0.0, last_signed = 0.0;
  std::vector<Box3> frontier = std::move(singular_cells);
  for (int depth = 0; depth < opts.max_refine_depth && !frontier.empty(); ++depth) {
    std::vector<Box3> next;
    double level_sum = 0.0;
    for (const auto& cell : frontier) {
      const Vec3 c = cell.center();
      for (int oct = 0; oct < 8; ++oct) {
        Box3 child;
        child.lo = {oct & 1 ? c.x : cell.lo.x, oct & 2 ? c.y : cell.lo.y,
                    oct & 4 ? c.z : cell.lo.z};
        child.hi = {oct & 1 ? cell.hi.x : c.x, oct & 2 ? cell.hi.y : c.y,
                    oct & 4 ? cell.hi.z : c.z};
        bool singular = false;
        for (const auto& s : loci)
          if (locus_intersects_box(s, child)) {
            singular = true;
            break;
          }
        if (singular) {
          next.push_back(child);
        } else {
          level_sum += integrand(child.center()) * child.volume();
        }
      }
    }
    total += level_sum;
    prev_abs = last_abs;
    last_abs = std::abs(level_sum);
    last_signed = level_sum;
    if (std::abs(total) > opts.divergence_bound)
      throw NonFiniteError("integrate_box_refined: partial sums exceed the divergence bound");
    frontier = std::move(next);
  }

  if (!frontier.empty() && last_abs > 0.0) {
    // Geometric tail from the last two resolved levels.
    const double ratio = prev_abs > 0.0 ? last_abs / prev_abs : 1.0;
    if (ratio >= opts.tail_ratio_cap)
      throw NonFiniteError("integrate_box_refined: no decay at maximum refinement depth");
    total += last_signed * ratio / (1.0 - ratio);
  }
  return total;
}

}  // namespace detail

// Integral of |X|^p over the region (the p-th power, not the norm).
inline double lp_energy(const FieldSource& field, double p, const Region& region, int resolution,
                        const LpOptions& opts = {}) {
  if (!(p > 0.0)) throw Error("lp_energy: p must be positive");

  if (const auto* br = std::get_if<BoxRegion>(&region)) {
    const Box3& b = br->box;
    if (!field.domain().contains(b.lo) || !field.domain().contains(b.hi))
      throw OutOfDomainError("lp_energy: region outside field domain");
    auto integrand = [&](const Vec3& x) { return std::pow(field.eval_raw(x).norm(), p); };
    return detail::integrate_box_refined(integrand, b, resolution, field.singularities(), opts);
  }

  const auto& sh = std::get<ShellRegion>(region);
  if (!(sh.r_min > 0.0) || !(sh.r_max > sh.r_min)) throw Error("lp_energy: bad shell radii");
  if (!field.domain().contains_ball(sh.center, sh.r_max))
    throw OutOfDomainError("lp_energy: shell outside field domain");
  for (const auto& s : field.singularities()) {
    const double d0 = s.distance(sh.center);
    const double d1 = std::max((s.a - sh.center).norm(), (s.b - sh.center).norm());
    if (d1 >= sh.r_min && d0 <= sh.r_max)
      throw Error("lp_energy: singular locus inside shell; use a box region");
  }

  // Geometric radial panels (handles steep power-law integrands down to
  // small inner radii), Gauss in r, product sphere rule in angle.
  const int order = std::max(6, resolution);
  const SphereQuadrature sq = sphere_quadrature(order);
  const int panels = std::max(12, static_cast<int>(std::ceil(4.0 * std::log2(sh.r_max / sh.r_min))));
  const double g = std::pow(sh.r_max / sh.r_min, 1.0 / panels);
  double total = 0.0;
  for (int j = 0; j < panels; ++j) {
    const double ra = sh.r_min * std::pow(g, j);
    const double rb = (j + 1 == panels) ? sh.r_max : sh.r_min * std::pow(g, j + 1);
    const GaussRule gr = gauss_legendre(12, ra, rb);
    for (std::size_t q = 0; q < gr.nodes.size(); ++q) {
      const double r = gr.nodes[q];
      double ang = 0.0;
      for (std::size_t i = 0; i < sq.size(); ++i)
        ang += sq.weights[i] * std::pow(field.eval_raw(sh.center + sq.nodes[i] * r).norm(), p);
      total += gr.weights[q] * r * r * ang;
    }
  }
  return total;
}

// (integral of |X|^p)^(1/p).
inline double lp_norm(const FieldSource& field, double p, const Region& region, int resolution,
                      const LpOptions& opts = {}) {
  return std::pow(lp_energy(field, p, region, resolution, opts), 1.0 / p);
}

}  // namespace iflux
