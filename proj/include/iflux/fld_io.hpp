#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "iflux/errors.hpp"
#include "iflux/field.hpp"
#include "iflux/grid.hpp"

namespace iflux {

// "FLD1" field container, little-endian:
//   8 bytes magic "FLD1\0\0\0\0"
//   3 x u32 dims, 3 x f64 origin, 3 x f64 spacing, u32 component count (3)
//   row-major f64 samples, x fastest, components interleaved per node.
inline constexpr char kFldMagic[8] = {'F', 'L', 'D', '1', 0, 0, 0, 0};

namespace detail {

template <typename T>
void write_le(std::ostream& os, T v) {
  // Assumes a little-endian host, as everywhere this project builds.
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw FormatError("FLD1: truncated payload");
  return v;
}

}  // namespace detail

inline void write_fld(std::ostream& os, const VectorGrid& g) {
  g.validate();
  os.write(kFldMagic, 8);
  for (int a = 0; a < 3; ++a) detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.spec.dims[a]));
  for (int a = 0; a < 3; ++a) detail::write_le<double>(os, g.spec.origin[a]);
  for (int a = 0; a < 3; ++a) detail::write_le<double>(os, g.spec.spacing[a]);
  detail::write_le<std::uint32_t>(os, 3u);
  for (double s : g.samples) detail::write_le<double>(os, s);
  if (!os) throw Error("FLD1: write failed");
}

inline void write_fld(const std::string& path, const VectorGrid& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("FLD1: cannot open for writing: " + path);
  write_fld(os, g);
}

inline VectorGrid read_fld(std::istream& is) {
  char magic[8] = {};
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kFldMagic, 8) != 0) throw FormatError("FLD1: bad magic");
  VectorGrid g;
  for (int a = 0; a < 3; ++a) {
    const auto d = detail::read_le<std::uint32_t>(is);
    if (d < 2 || d > (1u << 24)) throw FormatError("FLD1: unreasonable dims");
    g.spec.dims[a] = static_cast<int>(d);
  }
  for (int a = 0; a < 3; ++a) g.spec.origin[a] = detail::read_le<double>(is);
  for (int a = 0; a < 3; ++a) g.spec.spacing[a] = detail::read_le<double>(is);
  const auto comps = detail::read_le<std::uint32_t>(is);
  if (comps != 3) throw FormatError("FLD1: expected 3 components");
  g.samples.resize(3 * g.spec.node_count());
  for (double& s : g.samples) s = detail::read_le<double>(is);
  g.validate();
  return g;
}

inline VectorGrid read_fld(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("FLD1: cannot open: " + path);
  return read_fld(is);
}

namespace detail {

inline void collect_dipoles(const FieldSource& f, std::vector<DipoleSpec>& out) {
  if (const auto* d = f.as_dipole()) out.push_back(*d);
  if (const auto* terms = f.as_sum())
    for (const auto& t : *terms)
      if (t.coeff != 0.0) collect_dipoles(*t.field, out);
}

}  // namespace detail

// Sample any field onto an n^3 grid over its domain box. Nodes that land on
// a singular locus get the average of slightly offset samples. Dipoles whose
// half-length falls below 4 grid spacings cannot be represented and are
// rejected.
inline VectorGrid rasterize(const FieldSource& field, int n) {
  if (n < 2) throw Error("rasterize: need at least 2 nodes per axis");
  VectorGrid g;
  const Box3 box = field.domain();
  g.spec.origin = box.lo;
  g.spec.dims = {n, n, n};
  const Vec3 ext = box.extent();
  g.spec.spacing = {ext.x / (n - 1), ext.y / (n - 1), ext.z / (n - 1)};
  {
    std::vector<DipoleSpec> dipoles;
    detail::collect_dipoles(field, dipoles);
    const double h = std::max({g.spec.spacing.x, g.spec.spacing.y, g.spec.spacing.z});
    for (const auto& d : dipoles)
      if (d.half_length() < 4.0 * h)
        throw DegenerateDipoleError("rasterize: dipole thinner than 4 grid spacings");
  }
  g.samples.resize(3 * g.spec.node_count());
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Vec3 p = g.spec.node(i, j, k);
        Vec3 v{0, 0, 0};
        try {
          v = field.eval_raw(p);
        } catch (const SingularPointError&) {
          const double h = 1e-6 * g.spec.spacing.norm();
          Vec3 acc{0, 0, 0};
          for (int s = 0; s < 2; ++s) {
            const double off = s ? h : -h;
            try {
              acc += field.eval_raw(p + Vec3{off, off, off});
            } catch (const Error&) {
            }
          }
          v = acc * 0.5;
        }
        const std::size_t base = 3 * g.spec.index(i, j, k);
        g.samples[base] = v.x;
        g.samples[base + 1] = v.y;
        g.samples[base + 2] = v.z;
      }
  return g;
}

}  // namespace iflux
