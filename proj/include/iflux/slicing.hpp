#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/field.hpp"
#include "iflux/sphere_form.hpp"

namespace iflux {

// Printf-style shortest faithful formatting used by every text interface.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SliceOptions {
  // A singular locus within this distance of the sphere surface invalidates
  // the sphere.
  double surface_tolerance = 1e-9;
};

namespace detail {

inline void check_sphere(const FieldSource& field, const Vec3& center, double radius,
                         const SliceOptions& opts) {
  if (!(radius > 0.0)) throw Error("sphere: radius must be positive");
  if (!field.domain().contains_ball(center, radius))
    throw OutOfDomainError("sphere not inside field domain");
  for (const auto& s : field.singularities())
    if (s.sphere_surface_distance(center, radius) <= opts.surface_tolerance)
      throw SingularOnSphereError("singular locus on the sphere surface");
}

}  // namespace detail

// Pullback of the field's normal flux density to the unit sphere through
// T_r(theta) = center + r*theta; values carry the r^2 Jacobian so they are
// per unit solid angle and integral(slice) is the flux.
inline SphereForm slice_pullback(const FieldSource& field, const Vec3& center, double radius,
                                 std::shared_ptr<const SphereQuadrature> rule,
                                 const SliceOptions& opts = {}) {
  detail::check_sphere(field, center, radius, opts);
  SphereForm form;
  form.quadrature = std::move(rule);
  form.radius = radius;
  form.center = center;
  form.values.resize(form.quadrature->size());
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < form.quadrature->size(); ++i) {
    const Vec3& theta = form.quadrature->nodes[i];
    form.values[i] = r2 * field.eval_raw(center + theta * radius).dot(theta);
  }
  return form;
}

// Quadrature of X . nu over the sphere: sum of w_i r^2 X(a + r theta_i) . theta_i.
inline double sphere_flux(const FieldSource& field, const Vec3& center, double radius,
                          const SphereQuadrature& rule, const SliceOptions& opts = {}) {
  detail::check_sphere(field, center, radius, opts);
  double acc = 0.0;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < rule.size(); ++i)
    acc += rule.weights[i] * r2 * field.eval_raw(center + rule.nodes[i] * radius).dot(rule.nodes[i]);
  return acc;
}

// A-posteriori quadrature error estimate: |flux at order n - flux at order 2n|.
inline double flux_error_estimate(const FieldSource& field, const Vec3& center, double radius,
                                  int order, const SliceOptions& opts = {}) {
  const double f1 = sphere_flux(field, center, radius, sphere_quadrature(order), opts);
  const double f2 = sphere_flux(field, center, radius, sphere_quadrature(2 * order), opts);
  return std::abs(f1 - f2);
}

// Radial family of slices about one center. Invalid radii (sphere touches a
// singular locus) are flagged, not interpolated.
struct SliceScan {
  Vec3 center{0, 0, 0};
  double p = 1.0;
  std::shared_ptr<const SphereQuadrature> rule;
  std::vector<double> radii;
  std::vector<double> flux;
  std::vector<double> energy;  // ||h(r)||_{L^p(S^2)}^p
  std::vector<SphereForm> slices;
  std::vector<bool> valid;

  std::size_t size() const { return radii.size(); }
};

inline SliceScan radial_scan(const FieldSource& field, const Vec3& center, double r_min,
                             double r_max, int n_samples, double p,
                             std::shared_ptr<const SphereQuadrature> rule,
                             const SliceOptions& opts = {}) {
  if (n_samples < 2) throw Error("radial_scan: need at least 2 samples");
  if (!(r_min > 0.0) || !(r_max > r_min)) throw Error("radial_scan: bad radius interval");
  if (!(r_max < field.domain().boundary_distance(center)))
    throw OutOfDomainError("radial_scan: r_max reaches the domain boundary");
  SliceScan scan;
  scan.center = center;
  scan.p = p;
  scan.rule = rule;
  scan.radii.resize(n_samples);
  scan.flux.assign(n_samples, 0.0);
  scan.energy.assign(n_samples, 0.0);
  scan.valid.assign(n_samples, false);
  scan.slices.resize(n_samples);
  const double dr = (r_max - r_min) / (n_samples - 1);
  for (int i = 0; i < n_samples; ++i) {
    const double r = r_min + dr * i;
    scan.radii[i] = r;
    try {
      SphereForm slice = slice_pullback(field, center, r, rule, opts);
      scan.flux[i] = integral(slice);
      scan.energy[i] = lp_energy(slice, p);
      scan.slices[i] = std::move(slice);
      scan.valid[i] = true;
    } catch (const SingularOnSphereError&) {
      scan.valid[i] = false;
    }
  }
  return scan;
}

// Integer-flux membership report.
struct FluxRecord {
  Vec3 center{0, 0, 0};
  double radius = 0.0;
  double flux = 0.0;
  long long nearest = 0;
  double deviation = 0.0;
  bool valid = true;
};

struct FluxReport {
  std::vector<FluxRecord> records;
  double tau = 0.0;
  bool pass = false;
};

namespace detail {

inline FluxRecord make_record(const Vec3& center, double radius, double flux, bool valid) {
  FluxRecord rec;
  rec.center = center;
  rec.radius = radius;
  rec.flux = flux;
  rec.nearest = static_cast<long long>(std::llround(flux));
  rec.deviation = std::abs(flux - static_cast<double>(rec.nearest));
  rec.valid = valid;
  return rec;
}

}  // namespace detail

inline FluxReport integer_flux_report(const SliceScan& scan, double tau) {
  if (!(tau > 0.0) || !(tau < 0.5)) throw Error("integer_flux_report: tau must be in (0, 0.5)");
  FluxReport report;
  report.tau = tau;
  report.pass = true;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    FluxRecord rec = detail::make_record(scan.center, scan.radii[i], scan.flux[i], scan.valid[i]);
    if (rec.valid && rec.deviation > tau) report.pass = false;
    report.records.push_back(rec);
  }
  return report;
}

struct SphereSpec {
  Vec3 center{0, 0, 0};
  double radius = 0.0;
};

inline FluxReport integer_flux_report(const FieldSource& field, const std::vector<SphereSpec>& spheres,
                                      double tau, const SphereQuadrature& rule,
                                      const SliceOptions& opts = {}) {
  if (!(tau > 0.0) || !(tau < 0.5)) throw Error("integer_flux_report: tau must be in (0, 0.5)");
  FluxReport report;
  report.tau = tau;
  report.pass = true;
  for (const auto& s : spheres) {
    bool valid = true;
    double flux = 0.0;
    try {
      flux = sphere_flux(field, s.center, s.radius, rule, opts);
    } catch (const SingularOnSphereError&) {
      valid = false;
    }
    FluxRecord rec = detail::make_record(s.center, s.radius, flux, valid);
    if (rec.valid && rec.deviation > tau) report.pass = false;
    report.records.push_back(rec);
  }
  return report;
}

// Default tau from the a-posteriori quadrature estimate over a sphere set.
inline double default_tau(const FieldSource& field, const std::vector<SphereSpec>& spheres,
                          int order, const SliceOptions& opts = {}) {
  double worst = 0.0;
  for (const auto& s : spheres) {
    try {
      worst = std::max(worst, flux_error_estimate(field, s.center, s.radius, order, opts));
    } catch (const SingularOnSphereError&) {
    }
  }
  return std::min(0.49, std::max(1e-9, 10.0 * worst));
}

// Scan CSV: header `r,flux,nearest,deviation,energy,valid`, one row per
// radius, floats with 17 significant digits.
inline void write_scan_csv(std::ostream& os, const SliceScan& scan) {
  os << "r,flux,nearest,deviation,energy,valid\n";
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double flux = scan.flux[i];
    const long long nearest = static_cast<long long>(std::llround(flux));
    const double dev = std::abs(flux - static_cast<double>(nearest));
    os << fmt_g17(scan.radii[i]) << ',' << fmt_g17(flux) << ',' << nearest << ','
       << fmt_g17(dev) << ',' << fmt_g17(scan.energy[i]) << ',' << (scan.valid[i] ? 1 : 0)
       << '\n';
  }
}

inline void write_scan_csv(const std::string& path, const SliceScan& scan) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open scan CSV for writing: " + path);
  write_scan_csv(os, scan);
}

// Reads back the CSV columns (slices are not part of the format).
struct ScanTable {
  std::vector<double> radii;
  std::vector<double> flux;
  std::vector<double> energy;
  std::vector<bool> valid;
};

inline ScanTable read_scan_csv(std::istream& is) {
  ScanTable t;
  std::string line;
  if (!std::getline(is, line)) throw FormatError("scan CSV: empty file");
  if (line.rfind("r,flux,nearest,deviation,energy,valid", 0) != 0)
    throw FormatError("scan CSV: bad header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    double cols[5];
    for (int c = 0; c < 5; ++c) {
      if (!std::getline(ls, cell, ',')) throw FormatError("scan CSV: short row");
      cols[c] = std::stod(cell);
    }
    if (!std::getline(ls, cell, ',')) throw FormatError("scan CSV: short row");
    t.radii.push_back(cols[0]);
    t.flux.push_back(cols[1]);
    t.energy.push_back(cols[4]);
    t.valid.push_back(std::stoi(cell) != 0);
  }
  return t;
}

inline ScanTable read_scan_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open scan CSV: " + path);
  return read_scan_csv(is);
}

}  // namespace iflux
