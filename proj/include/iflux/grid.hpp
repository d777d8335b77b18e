#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/vec3.hpp"

namespace iflux {

// Node-collocated rectilinear grid. spacing*(dims-1) spans the box.
struct GridSpec {
  Vec3 origin{0, 0, 0};
  Vec3 spacing{1, 1, 1};
  std::array<int, 3> dims{2, 2, 2};

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (dims[a] < 2) throw Error("GridSpec: dims must be >= 2 per axis");
      if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
        throw Error("GridSpec: spacing must be positive and finite");
    }
    if (!origin.all_finite()) throw Error("GridSpec: origin must be finite");
  }

  std::size_t node_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  // x fastest
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(j) +
                                                static_cast<std::size_t>(dims[1]) * k);
  }
  Vec3 node(int i, int j, int k) const {
    return {origin.x + spacing.x * i, origin.y + spacing.y * j, origin.z + spacing.z * k};
  }
  Box3 box() const {
    return {origin,
            {origin.x + spacing.x * (dims[0] - 1), origin.y + spacing.y * (dims[1] - 1),
             origin.z + spacing.z * (dims[2] - 1)}};
  }
};

namespace detail {

struct TrilinearStencil {
  int i, j, k;          // base node
  double fx, fy, fz;    // fractional offsets in [0,1]
};

inline TrilinearStencil locate(const GridSpec& g, const Vec3& p) {
  TrilinearStencil s{};
  const double u = (p.x - g.origin.x) / g.spacing.x;
  const double v = (p.y - g.origin.y) / g.spacing.y;
  const double w = (p.z - g.origin.z) / g.spacing.z;
  auto clampi = [](double t, int n) {
    int i = static_cast<int>(std::floor(t));
    if (i < 0) i = 0;
    if (i > n - 2) i = n - 2;
    return i;
  };
  s.i = clampi(u, g.dims[0]);
  s.j = clampi(v, g.dims[1]);
  s.k = clampi(w, g.dims[2]);
  s.fx = u - s.i;
  s.fy = v - s.j;
  s.fz = w - s.k;
  return s;
}

}  // namespace detail

// Vector samples stored interleaved (vx,vy,vz per node), x fastest.
struct VectorGrid {
  GridSpec spec;
  std::vector<double> samples;  // 3 * node_count

  void validate() const {
    spec.validate();
    if (samples.size() != 3 * spec.node_count())
      throw Error("VectorGrid: sample count does not match dims");
  }

  Vec3 at(int i, int j, int k) const {
    const std::size_t base = 3 * spec.index(i, j, k);
    return {samples[base], samples[base + 1], samples[base + 2]};
  }

  Vec3 interpolate(const Vec3& p) const {
    const auto s = detail::locate(spec, p);
    Vec3 out{0, 0, 0};
    for (int dz = 0; dz < 2; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const double w = (dx ? s.fx : 1.0 - s.fx) * (dy ? s.fy : 1.0 - s.fy) *
                           (dz ? s.fz : 1.0 - s.fz);
          if (w != 0.0) out += at(s.i + dx, s.j + dy, s.k + dz) * w;
        }
    return out;
  }
};

// Scalar samples, x fastest. Used for densities and test scaffolding.
struct ScalarGrid {
  GridSpec spec;
  std::vector<double> samples;

  double at(int i, int j, int k) const { return samples[spec.index(i, j, k)]; }

  double interpolate(const Vec3& p) const {
    const auto s = detail::locate(spec, p);
    double out = 0.0;
    for (int dz = 0; dz < 2; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const double w = (dx ? s.fx : 1.0 - s.fx) * (dy ? s.fy : 1.0 - s.fy) *
                           (dz ? s.fz : 1.0 - s.fz);
          if (w != 0.0) out += at(s.i + dx, s.j + dy, s.k + dz) * w;
        }
    return out;
  }
};

}  // namespace iflux
