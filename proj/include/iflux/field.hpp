#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/grid.hpp"
#include "iflux/quadrature.hpp"
#include "iflux/vec3.hpp"

namespace iflux {

// Point or segment where a field blows up. Points are stored as degenerate
// segments (a == b).
struct SingularLocus {
  Vec3 a, b;

  bool is_point() const { return (a - b).norm2() == 0.0; }
  double distance(const Vec3& p) const { return point_segment_distance(p, a, b); }
  // Smallest |dist(x, center) - r| over the locus: 0 iff the locus touches
  // the sphere surface. Exact for points; for segments uses the range of the
  // distance function, which is what matters for surface crossings.
  double sphere_surface_distance(const Vec3& center, double r) const {
    if (is_point()) return std::abs((a - center).norm() - r);
    const double da = (a - center).norm();
    const double db = (b - center).norm();
    const double dmin = point_segment_distance(center, a, b);
    const double dmax = std::max(da, db);
    if (r < dmin) return dmin - r;
    if (r > dmax) return r - dmax;
    return 0.0;
  }
};

// Dipole of the explicit piecewise construction: a field supported in the
// bicone over the segment [a,b] (transverse radius rho_t, shrinking linearly
// to the poles), divergence-free in the interior, with unit point source at
// b and unit sink at a. Pairing contract: <X, grad g> = g(a) - g(b) for
// smooth g.
struct DipoleSpec {
  Vec3 a{0, 0, 0};           // sink pole
  Vec3 b{0, 0, 0};           // source pole
  double rho_t = -1.0;       // transverse radius; <0 means default (= half_length)
  int n = 3;                 // ambient dimension of the construction (2 or 3)

  double half_length() const { return 0.5 * (b - a).norm(); }
  double transverse_radius() const { return rho_t < 0.0 ? half_length() : rho_t; }

  void validate() const {
    if ((b - a).norm2() == 0.0) throw DegenerateDipoleError("dipole: coincident poles");
    if (n != 2 && n != 3) throw Error("dipole: dimension must be 2 or 3");
    if (rho_t == 0.0) throw DegenerateDipoleError("dipole: zero transverse radius");
    if (n == 2 && a.z != b.z) throw Error("2-D dipole: poles must share the z coordinate");
  }
};

class FieldSource;
using FieldPtr = std::shared_ptr<const FieldSource>;

// Immutable vector field on an axis-aligned box: closed-form kinds
// (constant, monopole, dipole, polynomial), grid-sampled with trilinear
// interpolation, or a weighted sum of parts.
class FieldSource {
 public:
  enum class Kind { Constant, Monopole, Dipole, Polynomial, Grid, Sum };

  // Monomial order for polynomial coefficients (total degree <= 2):
  // 1, x, y, z, x^2, y^2, z^2, xy, xz, yz.
  using PolyCoeffs = std::array<std::array<double, 10>, 3>;

  struct Term {
    double coeff;
    FieldPtr field;
  };

  static FieldSource constant(const Vec3& v, const Box3& box = Box3{}) {
    FieldSource f;
    f.node_ = Constant{v};
    f.box_ = box;
    return f;
  }

  // X(x) = (x - a) / (4 pi |x - a|^3): unit flux through every enclosing
  // sphere, singular at the center.
  static FieldSource monopole(const Vec3& center, const Box3& box) {
    FieldSource f;
    f.node_ = Monopole{center};
    f.box_ = box;
    return f;
  }
  static FieldSource monopole(const Vec3& center) {
    return monopole(center, Box3{center - Vec3{1, 1, 1}, center + Vec3{1, 1, 1}});
  }

  static FieldSource dipole(const DipoleSpec& spec, const Box3& box) {
    spec.validate();
    FieldSource f;
    f.node_ = DipoleNode::make(spec);
    f.box_ = box;
    return f;
  }
  static FieldSource dipole(const DipoleSpec& spec) {
    spec.validate();
    const double m = 2.0 * (spec.half_length() + spec.transverse_radius());
    Box3 box;
    box.lo = {std::min(spec.a.x, spec.b.x) - m, std::min(spec.a.y, spec.b.y) - m,
              std::min(spec.a.z, spec.b.z) - m};
    box.hi = {std::max(spec.a.x, spec.b.x) + m, std::max(spec.a.y, spec.b.y) + m,
              std::max(spec.a.z, spec.b.z) + m};
    return dipole(spec, box);
  }

  static FieldSource polynomial(const PolyCoeffs& c, const Box3& box = Box3{}) {
    FieldSource f;
    f.node_ = Polynomial{c};
    f.box_ = box;
    return f;
  }

  static FieldSource grid(VectorGrid g) {
    g.validate();
    FieldSource f;
    const Box3 box = g.spec.box();
    f.node_ = GridNode{std::make_shared<VectorGrid>(std::move(g))};
    f.box_ = box;
    return f;
  }

  static FieldSource sum(std::vector<Term> terms) {
    if (terms.empty()) throw Error("sum: needs at least one term");
    FieldSource f;
    Box3 box = terms.front().field->box_;
    for (std::size_t i = 1; i < terms.size(); ++i)
      box = Box3::intersect(box, terms[i].field->box_);
    f.node_ = Sum{std::move(terms)};
    f.box_ = box;
    return f;
  }

  Kind kind() const { return static_cast<Kind>(node_.index()); }
  const Box3& domain() const { return box_; }

  // Throws OutOfDomainError / SingularPointError per the declared loci.
  Vec3 evaluate(const Vec3& p) const {
    if (!box_.contains(p)) throw OutOfDomainError("evaluate: point outside field domain");
    return eval_raw(p);
  }

  std::vector<SingularLocus> singularities() const {
    std::vector<SingularLocus> out;
    collect_singularities(out);
    return out;
  }

  // Accessors for kind-specific payloads (used by adapted integration paths).
  const DipoleSpec* as_dipole() const {
    const auto* d = std::get_if<DipoleNode>(&node_);
    return d ? &d->spec : nullptr;
  }
  const Vec3* as_monopole_center() const {
    const auto* m = std::get_if<Monopole>(&node_);
    return m ? &m->center : nullptr;
  }
  const std::vector<Term>* as_sum() const {
    const auto* s = std::get_if<Sum>(&node_);
    return s ? &s->terms : nullptr;
  }
  const VectorGrid* as_grid() const {
    const auto* g = std::get_if<GridNode>(&node_);
    return g ? g->grid.get() : nullptr;
  }

  friend FieldSource operator+(const FieldSource& x, const FieldSource& y) {
    return sum({{1.0, std::make_shared<FieldSource>(x)}, {1.0, std::make_shared<FieldSource>(y)}});
  }
  friend FieldSource operator*(double s, const FieldSource& x) {
    return sum({{s, std::make_shared<FieldSource>(x)}});
  }

  Vec3 eval_raw(const Vec3& p) const {
    return std::visit([&](const auto& node) { return eval_node(node, p); }, node_);
  }

 private:
  struct Constant {
    Vec3 v;
  };
  struct Monopole {
    Vec3 center;
  };
  struct DipoleNode {
    DipoleSpec spec;
    Vec3 axis;       // unit, from b (source) toward a (sink)
    double eps;      // half-length
    double rho;      // transverse radius
    double amp;      // (eps/rho)^(n-1) / |B^{n-1}_1|
    static DipoleNode make(const DipoleSpec& s) {
      DipoleNode d;
      d.spec = s;
      d.eps = s.half_length();
      d.rho = s.transverse_radius();
      d.axis = (s.a - s.b).normalized();
      const double ratio = d.eps / d.rho;
      d.amp = (s.n == 3) ? ratio * ratio / kPi : ratio / 2.0;
      return d;
    }
  };
  struct Polynomial {
    PolyCoeffs c;
  };
  struct GridNode {
    std::shared_ptr<VectorGrid> grid;
  };
  struct Sum {
    std::vector<Term> terms;
  };

  static Vec3 eval_node(const Constant& n, const Vec3&) { return n.v; }

  static Vec3 eval_node(const Monopole& n, const Vec3& p) {
    const Vec3 d = p - n.center;
    const double r = d.norm();
    if (r < 1e-14) throw SingularPointError("monopole: evaluation at the center");
    return d / (kFourPi * r * r * r);
  }

  static Vec3 eval_node(const DipoleNode& d, const Vec3& p) {
    Vec3 rel = p - d.spec.b;
    if (d.spec.n == 2) rel.z = 0.0;  // planar construction, z-invariant
    const double u_b = rel.dot(d.axis);
    if (u_b <= 0.0 || u_b >= 2.0 * d.eps) return {0, 0, 0};
    const Vec3 y = rel - d.axis * u_b;
    // distance from the nearer apex, measured along the axis
    const bool source_half = u_b <= d.eps;
    const double u = source_half ? u_b : 2.0 * d.eps - u_b;
    if (y.norm() > d.rho * (u / d.eps)) return {0, 0, 0};
    if (u < 1e-13 * d.eps) throw SingularPointError("dipole: evaluation at a pole");
    const double c = d.amp / (d.spec.n == 3 ? u * u : u);
    return source_half ? (d.axis + y / u) * c : (d.axis - y / u) * c;
  }

  static Vec3 eval_node(const Polynomial& n, const Vec3& p) {
    const double m[10] = {1.0,       p.x,       p.y,       p.z,       p.x * p.x,
                          p.y * p.y, p.z * p.z, p.x * p.y, p.x * p.z, p.y * p.z};
    Vec3 out{0, 0, 0};
    for (int c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (int t = 0; t < 10; ++t) acc += n.c[c][t] * m[t];
      out[c] = acc;
    }
    return out;
  }

  static Vec3 eval_node(const GridNode& n, const Vec3& p) { return n.grid->interpolate(p); }

  static Vec3 eval_node(const Sum& n, const Vec3& p) {
    Vec3 out{0, 0, 0};
    for (const auto& t : n.terms) out += t.field->eval_raw(p) * t.coeff;
    return out;
  }

  void collect_singularities(std::vector<SingularLocus>& out) const {
    if (const auto* m = std::get_if<Monopole>(&node_)) {
      out.push_back({m->center, m->center});
    } else if (const auto* d = std::get_if<DipoleNode>(&node_)) {
      if (d->spec.n == 3) {
        out.push_back({d->spec.a, d->spec.a});
        out.push_back({d->spec.b, d->spec.b});
      } else {
        // z-invariant planar field: singular along the vertical lines
        // through the poles, clipped to the domain box.
        out.push_back({{d->spec.a.x, d->spec.a.y, box_.lo.z}, {d->spec.a.x, d->spec.a.y, box_.hi.z}});
        out.push_back({{d->spec.b.x, d->spec.b.y, box_.lo.z}, {d->spec.b.x, d->spec.b.y, box_.hi.z}});
      }
    } else if (const auto* s = std::get_if<Sum>(&node_)) {
      for (const auto& t : s->terms)
        if (t.coeff != 0.0) t.field->collect_singularities(out);
    }
  }

  std::variant<Constant, Monopole, DipoleNode, Polynomial, GridNode, Sum> node_;
  Box3 box_;
};

inline std::string to_string(FieldSource::Kind k) {
  switch (k) {
    case FieldSource::Kind::Constant: return "constant";
    case FieldSource::Kind::Monopole: return "monopole";
    case FieldSource::Kind::Dipole: return "dipole";
    case FieldSource::Kind::Polynomial: return "polynomial";
    case FieldSource::Kind::Grid: return "grid";
    case FieldSource::Kind::Sum: return "sum";
  }
  return "?";
}

}  // namespace iflux
