#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/metric.hpp"
#include "iflux/slicing.hpp"

namespace iflux {

// f(r) = ||h(r)||_{L^p(S^2)}^p along a radial scan, with invalid radii masked.
struct EnergyProfile {
  std::vector<double> radii;
  std::vector<double> f;
  std::vector<bool> valid;
  double p = 1.0;

  std::size_t size() const { return radii.size(); }
};

inline EnergyProfile slice_energy(const SliceScan& scan) {
  EnergyProfile prof;
  prof.radii = scan.radii;
  prof.f = scan.energy;
  prof.valid = scan.valid;
  prof.p = scan.p;
  int valid_count = 0;
  for (bool v : prof.valid) valid_count += v ? 1 : 0;
  if (valid_count < 2) throw TooFewRadiiError("slice_energy: fewer than 2 valid radii");
  return prof;
}

// Mf(x): supremum of trapezoid means of f over sample-aligned subintervals
// of [lo, hi] containing x, including the degenerate one-sample interval.
// Subintervals never span an invalid sample.
struct MaximalProfile {
  std::vector<double> radii;
  std::vector<double> Mf;
  std::vector<double> N;  // Mf^{1/p}
  std::vector<bool> in_interval;
  double p = 1.0;
  double lo = 0.0, hi = 0.0;
};

inline MaximalProfile uncentered_maximal(const EnergyProfile& prof, double lo, double hi) {
  if (!(lo < hi)) throw Error("uncentered_maximal: empty interval");
  const std::size_t n = prof.size();
  MaximalProfile out;
  out.radii = prof.radii;
  out.p = prof.p;
  out.lo = lo;
  out.hi = hi;
  out.Mf.assign(n, 0.0);
  out.N.assign(n, 0.0);
  out.in_interval.assign(n, false);

  std::vector<int> run;  // indices of one contiguous valid run inside [lo, hi]
  auto flush_run = [&]() {
    const int m = static_cast<int>(run.size());
    if (m == 0) return;
    // prefix trapezoid integrals over the run
    std::vector<double> T(m, 0.0);
    for (int i = 1; i < m; ++i) {
      const double dr = prof.radii[run[i]] - prof.radii[run[i - 1]];
      T[i] = T[i - 1] + 0.5 * (prof.f[run[i]] + prof.f[run[i - 1]]) * dr;
    }
    for (int i = 0; i < m; ++i) {
      double best = prof.f[run[i]];  // degenerate interval
      for (int l = 0; l <= i; ++l)
        for (int r = std::max(i, l + 1); r < m; ++r) {
          const double len = prof.radii[run[r]] - prof.radii[run[l]];
          best = std::max(best, (T[r] - T[l]) / len);
        }
      out.Mf[run[i]] = best;
      out.N[run[i]] = std::pow(best, 1.0 / prof.p);
      out.in_interval[run[i]] = true;
    }
    run.clear();
  };
  for (std::size_t i = 0; i < n; ++i) {
    const bool participates = prof.valid[i] && prof.radii[i] >= lo && prof.radii[i] <= hi;
    if (participates)
      run.push_back(static_cast<int>(i));
    else
      flush_run();
  }
  flush_run();
  return out;
}

// Trapezoid-consistent sample weights per contiguous participating run.
inline std::vector<double> profile_weights(const MaximalProfile& mp) {
  const std::size_t n = mp.radii.size();
  std::vector<double> w(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    if (!mp.in_interval[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && mp.in_interval[j + 1]) ++j;
    for (std::size_t k = i; k <= j; ++k) {
      double wk = 0.0;
      if (k > i) wk += 0.5 * (mp.radii[k] - mp.radii[k - 1]);
      if (k < j) wk += 0.5 * (mp.radii[k + 1] - mp.radii[k]);
      w[k] = wk;
    }
    i = j + 1;
  }
  return w;
}

// Marcinkiewicz-type check: sup_lambda lambda^p |{N > lambda}| <= C int |f|.
struct WeakBoundReport {
  double sup_value = 0.0;        // sup over all thresholds
  double l1 = 0.0;               // int |f| over the interval
  double ratio = 0.0;            // sup / l1
  double constant = 3.0;
  bool pass = false;
  std::vector<double> lambda_grid;
  std::vector<double> grid_values;  // lambda^p |{N > lambda}| on the grid
};

inline WeakBoundReport weak_bound_check(const EnergyProfile& prof, const MaximalProfile& mp,
                                        double p, const std::vector<double>& lambda_grid,
                                        double constant = 3.0) {
  for (std::size_t i = 1; i < lambda_grid.size(); ++i)
    if (!(lambda_grid[i] > lambda_grid[i - 1]))
      throw Error("weak_bound_check: lambda grid must be positive increasing");
  if (!lambda_grid.empty() && !(lambda_grid.front() > 0.0))
    throw Error("weak_bound_check: lambda grid must be positive increasing");

  WeakBoundReport rep;
  rep.constant = constant;
  rep.lambda_grid = lambda_grid;
  const std::vector<double> w = profile_weights(mp);
  for (std::size_t i = 0; i < prof.size(); ++i)
    if (mp.in_interval[i]) rep.l1 += w[i] * std::abs(prof.f[i]);

  auto level_measure = [&](double lambda) {
    double m = 0.0;
    for (std::size_t i = 0; i < mp.N.size(); ++i)
      if (mp.in_interval[i] && mp.N[i] > lambda) m += w[i];
    return m;
  };
  // exact sup: thresholds just below each attained value of N
  for (std::size_t i = 0; i < mp.N.size(); ++i) {
    if (!mp.in_interval[i] || mp.N[i] <= 0.0) continue;
    const double lambda = mp.N[i] * (1.0 - 1e-12);
    rep.sup_value = std::max(rep.sup_value, std::pow(lambda, p) * level_measure(lambda));
  }
  for (double lambda : lambda_grid) {
    const double v = std::pow(lambda, p) * level_measure(lambda);
    rep.grid_values.push_back(v);
    rep.sup_value = std::max(rep.sup_value, v);
  }
  rep.ratio = rep.l1 > 0.0 ? rep.sup_value / rep.l1 : 0.0;
  rep.pass = rep.sup_value <= constant * rep.l1 + 1e-30;
  return rep;
}

// The two computable inequalities of the slice chain, checked for every
// sample pair inside the interval, plus the metric upper bound against the
// averaged slice for adjacent pairs with matching integer flux.
struct ChainReport {
  double worst_slack_i = std::numeric_limits<double>::infinity();
  double worst_slack_ii = std::numeric_limits<double>::infinity();
  double worst_metric_slack = std::numeric_limits<double>::infinity();
  long long pairs_checked = 0;
  long long metric_pairs_checked = 0;
  std::vector<std::pair<double, double>> flux_mismatch_radii;  // adjacent valid pairs
  bool pass_i = false;
  bool pass_ii = false;
};

struct ChainOptions {
  double slack_tol = 1e-9;
  bool check_metric = true;
  int metric_degree_cap = 0;  // 0: rule order - 1
};

inline ChainReport lipschitz_chain_check(const SliceScan& scan, double lo, double hi,
                                         const ChainOptions& opts = {}) {
  const std::size_t n = scan.size();
  std::vector<int> idx;
  for (std::size_t i = 0; i < n; ++i)
    if (scan.valid[i] && scan.radii[i] >= lo && scan.radii[i] <= hi)
      idx.push_back(static_cast<int>(i));
  if (idx.size() < 3) throw TooFewRadiiError("lipschitz_chain_check: fewer than 3 valid radii");

  const EnergyProfile prof = slice_energy(scan);
  const MaximalProfile mp = uncentered_maximal(prof, lo, hi);
  const double p = scan.p;
  const std::size_t nodes = scan.rule->size();

  ChainReport rep;
  // contiguous runs of valid in-interval samples
  std::vector<std::vector<int>> runs;
  {
    std::vector<int> run;
    for (std::size_t i = 0; i < n; ++i) {
      const bool ok = scan.valid[i] && scan.radii[i] >= lo && scan.radii[i] <= hi;
      if (ok)
        run.push_back(static_cast<int>(i));
      else if (!run.empty()) {
        runs.push_back(run);
        run.clear();
      }
    }
    if (!run.empty()) runs.push_back(run);
  }

  std::shared_ptr<const SphereBasis> basis;
  if (opts.check_metric) {
    const int L = opts.metric_degree_cap > 0 ? opts.metric_degree_cap : scan.rule->order - 1;
    if (L >= 8) basis = std::make_shared<SphereBasis>(scan.rule, L);
  }

  for (const auto& run : runs) {
    const int m = static_cast<int>(run.size());
    if (m < 2) continue;
    // nodewise trapezoid prefix of the slice forms and scalar prefix of f
    std::vector<double> P(static_cast<std::size_t>(m) * nodes, 0.0);
    std::vector<double> T(m, 0.0);
    for (int i = 1; i < m; ++i) {
      const double dr = scan.radii[run[i]] - scan.radii[run[i - 1]];
      const auto& va = scan.slices[run[i - 1]].values;
      const auto& vb = scan.slices[run[i]].values;
      double* row = P.data() + static_cast<std::size_t>(i) * nodes;
      const double* prev = P.data() + static_cast<std::size_t>(i - 1) * nodes;
      for (std::size_t q = 0; q < nodes; ++q) row[q] = prev[q] + 0.5 * (va[q] + vb[q]) * dr;
      T[i] = T[i - 1] + 0.5 * (prof.f[run[i]] + prof.f[run[i - 1]]) * dr;
    }
    for (int l = 0; l < m; ++l)
      for (int r = l + 1; r < m; ++r) {
        const double delta = scan.radii[run[r]] - scan.radii[run[l]];
        // (i): || int h ||_p <= delta^{1-1/p} (int ||h||_p^p)^{1/p}
        double lhs_energy = 0.0;
        const double* rowr = P.data() + static_cast<std::size_t>(r) * nodes;
        const double* rowl = P.data() + static_cast<std::size_t>(l) * nodes;
        for (std::size_t q = 0; q < nodes; ++q)
          lhs_energy += scan.rule->weights[q] * std::pow(std::abs(rowr[q] - rowl[q]), p);
        const double lhs = std::pow(lhs_energy, 1.0 / p);
        const double mid = std::pow(delta, 1.0 - 1.0 / p) * std::pow(T[r] - T[l], 1.0 / p);
        rep.worst_slack_i = std::min(rep.worst_slack_i, mid - lhs);
        // (ii): mid <= delta * (M_K f(t))^{1/p} at the left endpoint
        const double rhs = delta * mp.N[run[l]];
        rep.worst_slack_ii = std::min(rep.worst_slack_ii, rhs - mid);
        ++rep.pairs_checked;

        if (r == l + 1) {
          const long long flux_l = std::llround(scan.flux[run[l]]);
          const long long flux_r = std::llround(scan.flux[run[r]]);
          if (flux_l != flux_r) {
            rep.flux_mismatch_radii.emplace_back(scan.radii[run[l]], scan.radii[run[r]]);
          } else if (basis) {
            DomainSpec dom;
            dom.kind = DomainSpec::Kind::Sphere;
            dom.resolution = basis->degree_cap();
            const double u =
                metric_upper_bound_detail(scan.slices[run[l]], scan.slices[run[r]], p, dom, basis)
                    .upper_bound;
            rep.worst_metric_slack = std::min(rep.worst_metric_slack, lhs - u);
            ++rep.metric_pairs_checked;
          }
        }
      }
  }
  rep.pass_i = rep.worst_slack_i >= -opts.slack_tol;
  rep.pass_ii = rep.worst_slack_ii >= -opts.slack_tol;
  return rep;
}

}  // namespace iflux
