#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/field.hpp"
#include "iflux/grid.hpp"
#include "iflux/lp_norm.hpp"
#include "iflux/synthesis.hpp"

namespace iflux {

// YM_p energy: integral of |X|^p over the region (the p-th power).
inline double ym_p(const FieldSource& field, double p, const Region& region, int resolution,
                   const LpOptions& opts = {}) {
  return lp_energy(field, p, region, resolution, opts);
}

// Prescribed integer point charges on a grid.
struct ChargeSpec {
  struct Charge {
    Vec3 point;
    long long degree;
  };
  std::vector<Charge> atoms;
  GridSpec grid;

  void validate() const {
    grid.validate();
    long long total = 0;
    for (const auto& a : atoms) {
      if (!grid.box().contains(a.point))
        throw OutOfDomainError("ChargeSpec: atom outside the grid box");
      total += a.degree;
    }
    if (total != 0)
      throw IncompatibleChargesError("ChargeSpec: degrees must sum to zero for zero-flux boundary");
    for (std::size_t i = 0; i < atoms.size(); ++i)
      for (std::size_t j = i + 1; j < atoms.size(); ++j)
        if ((atoms[i].point - atoms[j].point).norm() == 0.0)
          throw Error("ChargeSpec: atoms must be pairwise distinct");
  }
};

struct SolverOptions {
  double step = 1.0;        // initial step scale
  int max_iters = 20000;
  double tol = 1e-8;        // divergence residual tolerance (max norm)
  double smoothing = -1.0;  // epsilon_s; <0 selects the default scale
  double obj_tol = 1e-13;   // relative objective stall tolerance
  int trace_stride = 1;
};

struct TraceRow {
  int iter;
  double objective;
  double div_residual;
};

struct SolveTrace {
  std::vector<TraceRow> rows;
  int iterations = 0;
  double final_objective = 0.0;
  double final_residual = 0.0;
  double smoothing_used = 0.0;
  bool converged = false;
};

// Shared discretization: X lives on grid nodes (3 components, trilinear
// between nodes); the divergence of a cell is the net flux of the
// interpolant out of the cell. Normal components on the box faces are hard
// zeros, which makes the cell divergences sum to zero exactly.
class DivergenceConstraint {
 public:
  explicit DivergenceConstraint(const GridSpec& g) : g_(g) {
    g_.validate();
    nx_ = g_.dims[0];
    ny_ = g_.dims[1];
    nz_ = g_.dims[2];
    h_ = g_.spacing;
    face_[0] = 0.25 * h_.y * h_.z;
    face_[1] = 0.25 * h_.x * h_.z;
    face_[2] = 0.25 * h_.x * h_.y;
    free_.assign(3 * g_.node_count(), 1.0);
    for (int k = 0; k < nz_; ++k)
      for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i) {
          const std::size_t base = 3 * g_.index(i, j, k);
          if (i == 0 || i == nx_ - 1) free_[base + 0] = 0.0;
          if (j == 0 || j == ny_ - 1) free_[base + 1] = 0.0;
          if (k == 0 || k == nz_ - 1) free_[base + 2] = 0.0;
        }
  }

  const GridSpec& grid() const { return g_; }
  std::size_t dof() const { return 3 * g_.node_count(); }
  std::size_t cells() const {
    return static_cast<std::size_t>(nx_ - 1) * (ny_ - 1) * (nz_ - 1);
  }
  std::size_t cell_index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx_ - 1) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny_ - 1) * k);
  }
  double cell_volume() const { return h_.x * h_.y * h_.z; }
  const std::vector<double>& free_mask() const { return free_; }

  void zero_frozen(std::vector<double>& x) const {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= free_[i];
  }

  // D x: net outward flux per cell.
  void apply(const std::vector<double>& x, std::vector<double>& out) const {
    out.assign(cells(), 0.0);
    for (int k = 0; k + 1 < nz_; ++k)
      for (int j = 0; j + 1 < ny_; ++j)
        for (int i = 0; i + 1 < nx_; ++i) {
          double acc = 0.0;
          for (int d1 = 0; d1 < 2; ++d1)
            for (int d2 = 0; d2 < 2; ++d2) {
              acc += face_[0] * (at(x, i + 1, j + d1, k + d2, 0) - at(x, i, j + d1, k + d2, 0));
              acc += face_[1] * (at(x, i + d1, j + 1, k + d2, 1) - at(x, i + d1, j, k + d2, 1));
              acc += face_[2] * (at(x, i + d1, j + d2, k + 1, 2) - at(x, i + d1, j + d2, k, 2));
            }
          out[cell_index(i, j, k)] = acc;
        }
  }

  // D^T c into node space, frozen components zeroed.
  void apply_transpose(const std::vector<double>& c, std::vector<double>& out) const {
    out.assign(dof(), 0.0);
    for (int k = 0; k + 1 < nz_; ++k)
      for (int j = 0; j + 1 < ny_; ++j)
        for (int i = 0; i + 1 < nx_; ++i) {
          const double cv = c[cell_index(i, j, k)];
          if (cv == 0.0) continue;
          for (int d1 = 0; d1 < 2; ++d1)
            for (int d2 = 0; d2 < 2; ++d2) {
              ref(out, i + 1, j + d1, k + d2, 0) += face_[0] * cv;
              ref(out, i, j + d1, k + d2, 0) -= face_[0] * cv;
              ref(out, i + d1, j + 1, k + d2, 1) += face_[1] * cv;
              ref(out, i + d1, j, k + d2, 1) -= face_[1] * cv;
              ref(out, i + d1, j + d2, k + 1, 2) += face_[2] * cv;
              ref(out, i + d1, j + d2, k, 2) -= face_[2] * cv;
            }
        }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= free_[i];
  }

  // Deposit unit atoms: each charge goes to the cells incident to the
  // nearest node, split equally.
  std::vector<double> deposit(const std::vector<ChargeSpec::Charge>& atoms) const {
    std::vector<double> b(cells(), 0.0);
    for (const auto& a : atoms) {
      const Vec3 rel = a.point - g_.origin;
      int ni = static_cast<int>(std::lround(rel.x / h_.x));
      int nj = static_cast<int>(std::lround(rel.y / h_.y));
      int nk = static_cast<int>(std::lround(rel.z / h_.z));
      ni = std::clamp(ni, 0, nx_ - 1);
      nj = std::clamp(nj, 0, ny_ - 1);
      nk = std::clamp(nk, 0, nz_ - 1);
      std::vector<std::size_t> incident;
      for (int dk = -1; dk <= 0; ++dk)
        for (int dj = -1; dj <= 0; ++dj)
          for (int di = -1; di <= 0; ++di) {
            const int ci = ni + di, cj = nj + dj, ck = nk + dk;
            if (ci < 0 || cj < 0 || ck < 0 || ci >= nx_ - 1 || cj >= ny_ - 1 || ck >= nz_ - 1)
              continue;
            incident.push_back(cell_index(ci, cj, ck));
          }
      const double share = static_cast<double>(a.degree) / static_cast<double>(incident.size());
      for (std::size_t c : incident) b[c] += share;
    }
    return b;
  }

  // Solve (D D^T) c = r by conjugate gradients with constant deflation.
  std::vector<double> normal_solve(const std::vector<double>& r0, double rel_tol = 1e-13,
                                   int max_iters = 4000) const {
    std::vector<double> r = r0;
    deflate(r);
    std::vector<double> c(r.size(), 0.0), p = r, ap(r.size()), tmp_nodes;
    double rr = dot(r, r);
    const double rr0 = rr;
    if (rr0 == 0.0) return c;
    for (int it = 0; it < max_iters; ++it) {
      apply_transpose(p, tmp_nodes);
      apply(tmp_nodes, ap);
      deflate(ap);
      const double alpha = rr / dot(p, ap);
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += alpha * p[i];
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= alpha * ap[i];
      const double rr_new = dot(r, r);
      if (rr_new <= rel_tol * rel_tol * rr0) break;
      const double beta = rr_new / rr;
      rr = rr_new;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    }
    return c;
  }

 private:
  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }
  void deflate(std::vector<double>& v) const {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double& x : v) x -= m;
  }
  double at(const std::vector<double>& x, int i, int j, int k, int c) const {
    return x[3 * g_.index(i, j, k) + c];
  }
  double& ref(std::vector<double>& x, int i, int j, int k, int c) const {
    return x[3 * g_.index(i, j, k) + c];
  }

  GridSpec g_;
  int nx_, ny_, nz_;
  Vec3 h_;
  double face_[3];
  std::vector<double> free_;
};

// Smoothed L^p objective over cells: sum (|X_c|^2 + eps^2)^{p/2} * vol with
// X_c the trilinear value at the cell center (mean of the 8 corners).
class SmoothedLpObjective {
 public:
  SmoothedLpObjective(const DivergenceConstraint& dc, double p, double eps)
      : dc_(dc), p_(p), eps2_(eps * eps) {}

  double eps() const { return std::sqrt(eps2_); }
  void set_eps(double e) { eps2_ = e * e; }

  double value(const std::vector<double>& x) const {
    const auto& g = dc_.grid();
    const double vol = dc_.cell_volume();
    double acc = 0.0;
    for (int k = 0; k + 1 < g.dims[2]; ++k)
      for (int j = 0; j + 1 < g.dims[1]; ++j)
        for (int i = 0; i + 1 < g.dims[0]; ++i) {
          const Vec3 m = cell_mean(x, i, j, k);
          acc += std::pow(m.norm2() + eps2_, 0.5 * p_) * vol;
        }
    return acc;
  }

  void gradient(const std::vector<double>& x, std::vector<double>& grad) const {
    const auto& g = dc_.grid();
    const double vol = dc_.cell_volume();
    grad.assign(x.size(), 0.0);
    for (int k = 0; k + 1 < g.dims[2]; ++k)
      for (int j = 0; j + 1 < g.dims[1]; ++j)
        for (int i = 0; i + 1 < g.dims[0]; ++i) {
          const Vec3 m = cell_mean(x, i, j, k);
          const double scale = vol * p_ * std::pow(m.norm2() + eps2_, 0.5 * p_ - 1.0) / 8.0;
          for (int dz = 0; dz < 2; ++dz)
            for (int dy = 0; dy < 2; ++dy)
              for (int dx = 0; dx < 2; ++dx) {
                const std::size_t base = 3 * g.index(i + dx, j + dy, k + dz);
                grad[base] += scale * m.x;
                grad[base + 1] += scale * m.y;
                grad[base + 2] += scale * m.z;
              }
        }
  }

 private:
  Vec3 cell_mean(const std::vector<double>& x, int i, int j, int k) const {
    const auto& g = dc_.grid();
    Vec3 m{0, 0, 0};
    for (int dz = 0; dz < 2; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const std::size_t base = 3 * g.index(i + dx, j + dy, k + dz);
          m.x += x[base];
          m.y += x[base + 1];
          m.z += x[base + 2];
        }
    return m * 0.125;
  }

  const DivergenceConstraint& dc_;
  double p_;
  double eps2_;
};

struct MinimizeResult {
  VectorGrid field;
  SolveTrace trace;
};

namespace detail {

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double vdot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

// Minimize the smoothed L^p energy subject to the discrete divergence
// constraint (prescribed cell charges, zero normal flux on the boundary).
// Projected descent: every iterate is kept exactly feasible by routing the
// gradient through the null space of the constraint, so the problem stays
// convex and the trace monotone.
inline MinimizeResult minimize_charged(const ChargeSpec& spec, double p,
                                       const SolverOptions& opts = {}) {
  spec.validate();
  if (!(p > 1.0)) throw Error("minimize_charged: p must be > 1 (convex range)");
  const DivergenceConstraint dc(spec.grid);
  const std::vector<double> b = dc.deposit(spec.atoms);

  // Particular solution: min-norm feasible point X = D^T (D D^T)^+ b.
  std::vector<double> x, tmp_cells, tmp_nodes;
  {
    const std::vector<double> lam = dc.normal_solve(b);
    dc.apply_transpose(lam, x);
  }

  // Default smoothing from the coarse field scale, annealed once by 10x.
  double charge_scale = 0.0;
  for (const auto& a : spec.atoms) charge_scale = std::max(charge_scale, std::abs(static_cast<double>(a.degree)));
  const double h = std::min({spec.grid.spacing.x, spec.grid.spacing.y, spec.grid.spacing.z});
  const double field_scale = std::max(charge_scale / (h * h), 1e-12);
  double eps = opts.smoothing > 0.0 ? opts.smoothing : 1e-5 * field_scale;

  SmoothedLpObjective objective(dc, p, eps);
  SolveTrace trace;
  trace.smoothing_used = eps;

  auto project_tangent = [&](const std::vector<double>& v, std::vector<double>& out) {
    dc.apply(v, tmp_cells);
    const std::vector<double> lam = dc.normal_solve(tmp_cells);
    dc.apply_transpose(lam, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] - out[i];
  };

  double f = objective.value(x);
  std::vector<double> grad(x.size()), pg(x.size()), pg_prev, x_prev;
  double step = opts.step;
  int it = 0;
  bool annealed = false;
  auto residual = [&]() {
    dc.apply(x, tmp_cells);
    for (std::size_t i = 0; i < tmp_cells.size(); ++i) tmp_cells[i] -= b[i];
    return detail::max_abs(tmp_cells);
  };
  trace.rows.push_back({0, f, residual()});

  for (it = 1; it <= opts.max_iters; ++it) {
    objective.gradient(x, grad);
    dc.zero_frozen(grad);
    project_tangent(grad, pg);
    const double gnorm2 = detail::vdot(pg, pg);
    if (gnorm2 <= 1e-30) break;

    // Barzilai-Borwein step seed, then backtrack to enforce descent.
    if (!x_prev.empty()) {
      double sy = 0.0, ss = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = x[i] - x_prev[i];
        const double y = pg[i] - pg_prev[i];
        sy += s * y;
        ss += s * s;
      }
      if (sy > 1e-300) step = ss / sy;
    }
    step = std::min(std::max(step, 1e-18), 1e12);

    x_prev = x;
    pg_prev = pg;
    double trial_step = step;
    double f_new = f;
    std::vector<double> x_new(x.size());
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < x.size(); ++i) x_new[i] = x[i] - trial_step * pg[i];
      f_new = objective.value(x_new);
      if (f_new <= f - 1e-4 * trial_step * gnorm2) {
        accepted = true;
        break;
      }
      trial_step *= 0.5;
    }
    if (!accepted) {
      // flat to machine precision along the projected direction
      if (!annealed) {
        annealed = true;
        eps *= 0.1;
        objective.set_eps(eps);
        trace.smoothing_used = eps;
        f = objective.value(x);
        continue;
      }
      break;
    }
    x.swap(x_new);
    const double improvement = f - f_new;
    f = f_new;
    if (it % opts.trace_stride == 0 || it == opts.max_iters)
      trace.rows.push_back({it, f, residual()});
    if (improvement <= opts.obj_tol * std::max(std::abs(f), 1e-30)) {
      if (!annealed) {
        annealed = true;
        eps *= 0.1;
        objective.set_eps(eps);
        trace.smoothing_used = eps;
        f = objective.value(x);
        continue;
      }
      break;
    }
  }

  // One exact re-projection onto the affine constraint set.
  {
    dc.apply(x, tmp_cells);
    for (std::size_t i = 0; i < tmp_cells.size(); ++i) tmp_cells[i] -= b[i];
    const std::vector<double> lam = dc.normal_solve(tmp_cells);
    dc.apply_transpose(lam, tmp_nodes);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= tmp_nodes[i];
    f = objective.value(x);
  }

  trace.iterations = std::min(it, opts.max_iters);
  trace.final_objective = f;
  trace.final_residual = residual();
  trace.rows.push_back({trace.iterations, f, trace.final_residual});
  trace.converged = trace.final_residual <= opts.tol;
  if (!trace.converged)
    throw NoConvergenceError("minimize_charged: divergence residual above tolerance");

  MinimizeResult result;
  result.field.spec = spec.grid;
  result.field.samples = std::move(x);
  result.trace = trace;
  return result;
}

// --- growth diagnostic for the counterexample families ----------------------

enum class CounterexampleFamily {
  Lattice,        // (2^k - 1)^3 segments of length 2^-3k
  DyadicUniform,  // 2^{3k} tiling cells, one segment of length 2^-3k each
};

struct GrowthRow {
  double p;
  int k;
  double energy;  // sum over dipoles of int |X|^p
  double norm;    // energy^{1/p}
};

struct GrowthTable {
  std::vector<GrowthRow> rows;
  // per-p verdict: "bounded" or "growing", from the last ratio
  std::vector<std::pair<double, std::string>> flags;
};

inline GrowthTable growth_diagnostic(const std::vector<double>& p_list,
                                     const std::vector<int>& k_list,
                                     CounterexampleFamily family = CounterexampleFamily::DyadicUniform) {
  GrowthTable table;
  for (double p : p_list) {
    double prev = 0.0, last_ratio = 1.0;
    bool increasing = true;
    for (int k : k_list) {
      if (k < 1 || k > 20) throw Error("growth_diagnostic: k out of range");
      DipoleSpec d;
      const double half = std::pow(0.5, 3 * k + 1);
      d.b = {0.5 - half, 0.5, 0.5};
      d.a = {0.5 + half, 0.5, 0.5};
      const double per_dipole = dipole_lp_energy(d, p);
      const double count = family == CounterexampleFamily::Lattice
                               ? std::pow(std::pow(2.0, k) - 1.0, 3)
                               : std::pow(8.0, k);
      const double energy = per_dipole * count;
      table.rows.push_back({p, k, energy, std::pow(energy, 1.0 / p)});
      if (prev > 0.0) {
        last_ratio = energy / prev;
        if (energy <= prev) increasing = false;
      }
      prev = energy;
    }
    table.flags.emplace_back(p, (increasing && last_ratio > 1.05) ? "growing" : "bounded");
  }
  return table;
}

}  // namespace iflux
