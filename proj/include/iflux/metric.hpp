#pragma once

#include <cmath>
#include <memory>
#include <variant>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/fft.hpp"
#include "iflux/sph_harm.hpp"
#include "iflux/sphere_form.hpp"

namespace iflux {

// Domain for the slice metric machinery: the unit square with periodic
// extension (torus), or S^2.
struct DomainSpec {
  enum class Kind { SquarePeriodic, Sphere };
  Kind kind = Kind::SquarePeriodic;
  // modes per axis (square, power of two) or spherical-harmonic degree cap.
  int resolution = 64;

  void validate() const {
    if (resolution < 8) throw Error("DomainSpec: resolution must be >= 8");
    if (kind == Kind::SquarePeriodic && !detail::is_pow2(resolution))
      throw Error("DomainSpec: square-periodic resolution must be a power of two");
  }
};

// Scalar samples on the n x n periodic unit square, x fastest, nodes i/n.
struct TorusScalar {
  int n = 0;
  std::vector<double> v;

  static TorusScalar zeros(int n) { return {n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)}; }
  double& at(int i, int j) { return v[static_cast<std::size_t>(j) * n + i]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(j) * n + i]; }
  double mean() const {
    double s = 0.0;
    for (double x : v) s += x;
    return s / (static_cast<double>(n) * n);
  }
  // integral over [0,1]^2 of the sample cloud (cell area 1/n^2)
  double integral() const { return mean(); }
};

// Zero-mean scalar potential in spectral form, with gradients at grid nodes.
struct TorusPotential {
  int n = 0;
  std::vector<Cplx> fourier;  // n*n, forward transform scaled by 1/n^2

  std::vector<double> values() const {
    std::vector<Cplx> a = fourier;
    fft2(a, n, +1);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real();
    return out;
  }
  // spectral gradient; Nyquist mode derivative set to zero
  void gradient(std::vector<double>& gx, std::vector<double>& gy) const {
    std::vector<Cplx> ax(fourier.size()), ay(fourier.size());
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int kx = fft_freq(i, n), ky = fft_freq(j, n);
        const std::size_t id = static_cast<std::size_t>(j) * n + i;
        const double fx = (2 * kx == n) ? 0.0 : 2.0 * kPi * kx;
        const double fy = (2 * ky == n) ? 0.0 : 2.0 * kPi * ky;
        ax[id] = Cplx(0, fx) * fourier[id];
        ay[id] = Cplx(0, fy) * fourier[id];
      }
    fft2(ax, n, +1);
    fft2(ay, n, +1);
    gx.resize(ax.size());
    gy.resize(ay.size());
    for (std::size_t i = 0; i < ax.size(); ++i) {
      gx[i] = ax[i].real();
      gy[i] = ay[i].real();
    }
  }
};

struct SpherePotential {
  ShCoeffs coeffs;
  std::shared_ptr<const SphereBasis> basis;
};

using Potential = std::variant<TorusPotential, SpherePotential>;

namespace detail {

inline std::vector<Cplx> torus_forward(const TorusScalar& f) {
  std::vector<Cplx> a(f.v.size());
  for (std::size_t i = 0; i < f.v.size(); ++i) a[i] = f.v[i];
  fft2(a, f.n, -1);
  const double scale = 1.0 / (static_cast<double>(f.n) * f.n);
  for (auto& c : a) c *= scale;
  return a;
}

}  // namespace detail

// Solve Laplace(psi) = rhs with mean(psi) = 0 on the periodic square.
inline TorusPotential poisson_solve(const TorusScalar& rhs, const DomainSpec& domain) {
  domain.validate();
  if (domain.kind != DomainSpec::Kind::SquarePeriodic)
    throw Error("poisson_solve: TorusScalar rhs needs the square-periodic domain");
  if (rhs.n != domain.resolution) throw Error("poisson_solve: rhs resolution mismatch");
  double rms = 0.0;
  for (double x : rhs.v) rms += x * x;
  rms = std::sqrt(rms / rhs.v.size());
  if (std::abs(rhs.mean()) > 1e-10 * std::max(rms, 1e-30))
    throw NonZeroMeanError("poisson_solve: rhs has nonzero mean");
  TorusPotential psi;
  psi.n = rhs.n;
  psi.fourier = detail::torus_forward(rhs);
  for (int j = 0; j < rhs.n; ++j)
    for (int i = 0; i < rhs.n; ++i) {
      const int kx = fft_freq(i, rhs.n), ky = fft_freq(j, rhs.n);
      const std::size_t id = static_cast<std::size_t>(j) * rhs.n + i;
      const double k2 = 4.0 * kPi * kPi * (static_cast<double>(kx) * kx + static_cast<double>(ky) * ky);
      psi.fourier[id] = (k2 == 0.0) ? Cplx(0, 0) : psi.fourier[id] / (-k2);
    }
  return psi;
}

// Solve on S^2 in the spherical-harmonic basis of the form's quadrature.
inline SpherePotential poisson_solve(const SphereForm& rhs, const DomainSpec& domain,
                                     std::shared_ptr<const SphereBasis> basis = nullptr) {
  domain.validate();
  if (domain.kind != DomainSpec::Kind::Sphere)
    throw Error("poisson_solve: SphereForm rhs needs the sphere domain");
  rhs.validate();
  const double total = integral(rhs);
  double rms = lp_norm(rhs, 2.0);
  if (std::abs(total) > 1e-10 * std::max(rms, 1e-30))
    throw NonZeroMeanError("poisson_solve: rhs has nonzero mean");
  if (!basis) {
    const int L = std::min(domain.resolution, rhs.quadrature->order - 1);
    basis = std::make_shared<SphereBasis>(rhs.quadrature, L);
  }
  SpherePotential psi;
  psi.basis = basis;
  psi.coeffs = basis->analyze(rhs.values);
  for (int l = 0; l <= psi.coeffs.L; ++l) {
    const double eig = -static_cast<double>(l) * (l + 1);
    psi.coeffs.ref(l, 0, false) = l == 0 ? 0.0 : psi.coeffs.get(l, 0, false) / eig;
    for (int m = 1; m <= l; ++m) {
      psi.coeffs.ref(l, m, false) = psi.coeffs.get(l, m, false) / eig;
      psi.coeffs.ref(l, m, true) = psi.coeffs.get(l, m, true) / eig;
    }
  }
  return psi;
}

// Hodge decomposition of a discrete 1-form.
struct TorusOneForm {
  TorusScalar x, y;
};

struct TorusHodgeParts {
  TorusOneForm exact, coexact, harmonic;
};

inline TorusHodgeParts hodge_decompose(const TorusOneForm& alpha, const DomainSpec& domain) {
  domain.validate();
  const int n = alpha.x.n;
  if (alpha.y.n != n || n != domain.resolution) throw Error("hodge_decompose: resolution mismatch");
  auto ax = detail::torus_forward(alpha.x);
  auto ay = detail::torus_forward(alpha.y);
  std::vector<Cplx> ex(ax.size()), ey(ax.size()), cx(ax.size()), cy(ax.size());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const std::size_t id = static_cast<std::size_t>(j) * n + i;
      const int kxi = fft_freq(i, n), kyi = fft_freq(j, n);
      const double kx = (2 * kxi == n) ? 0.0 : 2.0 * kPi * kxi;
      const double ky = (2 * kyi == n) ? 0.0 : 2.0 * kPi * kyi;
      const double k2 = kx * kx + ky * ky;
      if (k2 == 0.0) {
        ex[id] = ey[id] = cx[id] = cy[id] = Cplx(0, 0);
        continue;
      }
      // f_hat = div_hat / (-k^2); exact = i k f_hat
      const Cplx div = Cplx(0, kx) * ax[id] + Cplx(0, ky) * ay[id];
      const Cplx fh = div / (-k2);
      ex[id] = Cplx(0, kx) * fh;
      ey[id] = Cplx(0, ky) * fh;
      // g_hat from the scalar curl; coexact = grad^perp g
      const Cplx curl = Cplx(0, kx) * ay[id] - Cplx(0, ky) * ax[id];
      const Cplx gh = curl / (-k2);
      cx[id] = -Cplx(0, ky) * gh;
      cy[id] = Cplx(0, kx) * gh;
    }
  auto to_grid = [&](std::vector<Cplx> spec) {
    fft2(spec, n, +1);  // forward was scaled by 1/n^2, so this restores values
    TorusScalar out = TorusScalar::zeros(n);
    for (std::size_t i = 0; i < spec.size(); ++i) out.v[i] = spec[i].real();
    return out;
  };
  TorusHodgeParts parts;
  parts.exact = {to_grid(ex), to_grid(ey)};
  parts.coexact = {to_grid(cx), to_grid(cy)};
  parts.harmonic.x = TorusScalar::zeros(n);
  parts.harmonic.y = TorusScalar::zeros(n);
  const double hx = alpha.x.mean(), hy = alpha.y.mean();
  for (auto& t : parts.harmonic.x.v) t = hx;
  for (auto& t : parts.harmonic.y.v) t = hy;
  return parts;
}

// Tangent 1-form on S^2 sampled at quadrature nodes, (e_theta, e_phi) frame.
struct SphereOneForm {
  std::vector<double> t, p;
  std::shared_ptr<const SphereQuadrature> quadrature;
};

struct SphereHodgeParts {
  SphereOneForm exact, coexact;  // harmonic part vanishes on S^2
};

inline SphereHodgeParts hodge_decompose(const SphereOneForm& alpha, const SphereBasis& basis) {
  const auto& q = basis.rule();
  if (alpha.t.size() != q.size() || alpha.p.size() != q.size())
    throw Error("hodge_decompose: node count mismatch");
  const int L = basis.degree_cap();
  // Project onto grad Y and grad-perp Y: <alpha, grad Y_lm> = l(l+1) f_lm.
  ShCoeffs f, g;
  f.L = g.L = L;
  f.c.assign(static_cast<std::size_t>(L + 1) * (L + 1), 0.0);
  g.c = f.c;
  std::vector<double> gt, gp;
  for (int l = 1; l <= L; ++l) {
    const double eig = static_cast<double>(l) * (l + 1);
    for (int m = 0; m <= l; ++m)
      for (int s = 0; s < (m == 0 ? 1 : 2); ++s) {
        ShCoeffs unit;
        unit.L = L;
        unit.c.assign(f.c.size(), 0.0);
        unit.ref(l, m, s == 1) = 1.0;
        basis.synthesize_gradient(unit, gt, gp);
        double pf = 0.0, pg = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
          pf += q.weights[i] * (alpha.t[i] * gt[i] + alpha.p[i] * gp[i]);
          pg += q.weights[i] * (-alpha.t[i] * gp[i] + alpha.p[i] * gt[i]);
        }
        f.ref(l, m, s == 1) = pf / eig;
        g.ref(l, m, s == 1) = pg / eig;
      }
  }
  SphereHodgeParts parts;
  basis.synthesize_gradient(f, parts.exact.t, parts.exact.p);
  basis.synthesize_gradient(g, gt, gp);
  parts.coexact.t.resize(q.size());
  parts.coexact.p.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    parts.coexact.t[i] = -gp[i];
    parts.coexact.p[i] = gt[i];
  }
  parts.exact.quadrature = parts.coexact.quadrature = basis.rule_ptr();
  return parts;
}

// Base point and mollification scale for the relaxed-distance bound. The
// default base point is the grid center.
struct MetricOptions {
  double x0 = 0.5, y0 = 0.5;
  double sigma_cells = 1.5;
};

// Mollified Dirac at the base point, unit discrete mass.
inline TorusScalar torus_mollified_dirac(int n, double sigma_cells = 1.5, double x0c = 0.5,
                                         double y0c = 0.5) {
  TorusScalar g = TorusScalar::zeros(n);
  const double sigma = sigma_cells / n;
  const Vec3 x0{x0c, y0c, 0.0};
  double sum = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      // nearest periodic image
      double dx = std::abs(static_cast<double>(i) / n - x0.x);
      double dy = std::abs(static_cast<double>(j) / n - x0.y);
      dx = std::min(dx, 1.0 - dx);
      dy = std::min(dy, 1.0 - dy);
      const double val = std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma));
      g.at(i, j) = val;
      sum += val;
    }
  const double cell = 1.0 / (static_cast<double>(n) * n);
  for (auto& t : g.v) t /= sum * cell;  // integral() == 1
  return g;
}

inline std::vector<double> sphere_mollified_dirac(const SphereQuadrature& q, double sigma_rad) {
  std::vector<double> g(q.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double ang = std::acos(std::min(1.0, std::max(-1.0, q.nodes[i].z)));  // from north pole
    g[i] = std::exp(-0.5 * ang * ang / (sigma_rad * sigma_rad));
    mass += q.weights[i] * g[i];
  }
  for (auto& t : g) t /= mass;
  return g;
}

struct MetricBoundDetail {
  double upper_bound = 0.0;
  double flux_h1 = 0.0;
  double flux_h2 = 0.0;
  double integer_gap = 0.0;  // distance of the total flux difference to Z
};

// Feasible-point upper bound for the relaxed slice distance: route the
// difference through the gradient of a Poisson potential, with one mollified
// Dirac at the base point absorbing the total flux mismatch.
inline MetricBoundDetail metric_upper_bound_detail(const TorusScalar& h1, const TorusScalar& h2,
                                                   double p, const DomainSpec& domain,
                                                   const MetricOptions& mopts = {}) {
  domain.validate();
  if (h1.n != h2.n) throw Error("metric_upper_bound: mismatched grids");
  if (!(p >= 1.0)) throw Error("metric_upper_bound: p must be >= 1");
  MetricBoundDetail out;
  out.flux_h1 = h1.integral();
  out.flux_h2 = h2.integral();
  const double total = out.flux_h1 - out.flux_h2;
  out.integer_gap = std::abs(total - std::nearbyint(total));
  const TorusScalar dirac = torus_mollified_dirac(h1.n, mopts.sigma_cells, mopts.x0, mopts.y0);
  TorusScalar rhs = TorusScalar::zeros(h1.n);
  for (std::size_t i = 0; i < rhs.v.size(); ++i)
    rhs.v[i] = h1.v[i] - h2.v[i] - total * dirac.v[i];
  // exact mean removal guards against roundoff in the Dirac normalization
  const double m = rhs.mean();
  for (auto& t : rhs.v) t -= m;
  const TorusPotential psi = poisson_solve(rhs, domain);
  std::vector<double> gx, gy;
  psi.gradient(gx, gy);
  const double cell = 1.0 / (static_cast<double>(h1.n) * h1.n);
  double acc = 0.0;
  for (std::size_t i = 0; i < gx.size(); ++i)
    acc += std::pow(std::hypot(gx[i], gy[i]), p) * cell;
  out.upper_bound = std::pow(acc, 1.0 / p);
  return out;
}

inline MetricBoundDetail metric_upper_bound_detail(const SphereForm& h1, const SphereForm& h2,
                                                   double p, const DomainSpec& domain,
                                                   std::shared_ptr<const SphereBasis> basis = nullptr) {
  domain.validate();
  h1.validate();
  h2.validate();
  if (h1.quadrature != h2.quadrature && h1.quadrature->size() != h2.quadrature->size())
    throw Error("metric_upper_bound: forms on different quadratures");
  if (!(p >= 1.0)) throw Error("metric_upper_bound: p must be >= 1");
  MetricBoundDetail out;
  out.flux_h1 = integral(h1);
  out.flux_h2 = integral(h2);
  const double total = out.flux_h1 - out.flux_h2;
  out.integer_gap = std::abs(total - std::nearbyint(total));
  const auto& q = *h1.quadrature;
  const double sigma = 1.5 * kPi / q.order;
  const std::vector<double> dirac = sphere_mollified_dirac(q, sigma);
  SphereForm rhs = h1;
  for (std::size_t i = 0; i < rhs.values.size(); ++i)
    rhs.values[i] = h1.values[i] - h2.values[i] - total * dirac[i];
  const double m = integral(rhs) / kFourPi;
  for (auto& t : rhs.values) t -= m;
  const SpherePotential psi = poisson_solve(rhs, domain, std::move(basis));
  std::vector<double> gt, gp;
  psi.basis->synthesize_gradient(psi.coeffs, gt, gp);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    acc += q.weights[i] * std::pow(std::hypot(gt[i], gp[i]), p);
  out.upper_bound = std::pow(acc, 1.0 / p);
  return out;
}

template <typename Form>
double metric_upper_bound(const Form& h1, const Form& h2, double p, const DomainSpec& domain) {
  return metric_upper_bound_detail(h1, h2, p, domain).upper_bound;
}

// Membership predicate of the integer-flux form class.
inline bool flux_class_check(double form_integral, double tau) {
  if (!(tau > 0.0) || !(tau < 0.5)) throw Error("flux_class_check: tau must be in (0, 0.5)");
  return std::abs(form_integral - std::nearbyint(form_integral)) <= tau;
}

inline bool flux_class_check(const SphereForm& form, double tau) {
  return flux_class_check(integral(form), tau);
}

inline bool flux_class_check(const TorusScalar& form, double tau) {
  return flux_class_check(form.integral(), tau);
}

}  // namespace iflux
