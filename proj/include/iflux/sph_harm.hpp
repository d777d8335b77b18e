#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/quadrature.hpp"

namespace iflux {

// Real spherical harmonics, fully normalized (orthonormal on S^2):
//   Y_{l0} = Pn_{l0}(cos th)
//   Y^c_{lm} = sqrt(2) Pn_{lm}(cos th) cos(m ph),  m >= 1
//   Y^s_{lm} = sqrt(2) Pn_{lm}(cos th) sin(m ph)
// Pn are the 4pi-normalized associated Legendre functions divided by
// sqrt(4pi), computed with the standard stable column recurrences.
class LegendreTable {
 public:
  // Values and theta-derivatives of Pn_{lm}(x) for all l <= L at one x.
  LegendreTable(int L, double x) : L_(L), val_((L + 1) * (L + 2) / 2), dth_(val_.size()) {
    const double s = std::sqrt(std::max(1e-300, 1.0 - x * x));  // sin(theta)
    // diagonal Pn_mm
    std::vector<double> diag(L + 1);
    diag[0] = std::sqrt(1.0 / kFourPi);
    for (int m = 1; m <= L; ++m)
      diag[m] = diag[m - 1] * s * std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    for (int m = 0; m <= L; ++m) {
      at(m, m) = diag[m];
      if (m + 1 <= L) at(m + 1, m) = x * std::sqrt(2.0 * m + 3.0) * diag[m];
      for (int l = m + 2; l <= L; ++l) {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
        const double b = std::sqrt(((l - 1.0) * (l - 1.0) - static_cast<double>(m) * m) /
                                   (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
        at(l, m) = a * (x * at(l - 1, m) - b * at(l - 2, m));
      }
    }
    // d/dtheta via (-l x Pn_lm + sqrt((l^2-m^2)(2l+1)/(2l-1)) Pn_{l-1,m}) / sin
    for (int m = 0; m <= L; ++m)
      for (int l = m; l <= L; ++l) {
        double below = 0.0;
        if (l > m)
          below = std::sqrt((static_cast<double>(l) * l - static_cast<double>(m) * m) * (2.0 * l + 1.0) /
                            (2.0 * l - 1.0)) * at(l - 1, m);
        dth(l, m) = (-static_cast<double>(l) * x * at(l, m) + below) / s;
      }
  }

  double& at(int l, int m) { return val_[idx(l, m)]; }
  double at(int l, int m) const { return val_[idx(l, m)]; }
  double& dth(int l, int m) { return dth_[idx(l, m)]; }
  double dth(int l, int m) const { return dth_[idx(l, m)]; }

 private:
  std::size_t idx(int l, int m) const { return static_cast<std::size_t>(l) * (l + 1) / 2 + m; }
  int L_;
  std::vector<double> val_, dth_;
};

// Coefficient layout for real SH up to degree L: (l,0) then (l,m,cos),(l,m,sin).
struct ShCoeffs {
  int L = 0;
  std::vector<double> c;  // size (L+1)^2

  static std::size_t index(int l, int m, bool sin_part) {
    // within degree l: [m=0, (1,c),(1,s), ..., (l,c),(l,s)]
    return static_cast<std::size_t>(l) * l + (m == 0 ? 0 : 2 * m - (sin_part ? 0 : 1));
  }
  double get(int l, int m, bool sin_part) const { return c[index(l, m, sin_part)]; }
  double& ref(int l, int m, bool sin_part) { return c[index(l, m, sin_part)]; }
};

// Precomputed tables for one product quadrature grid (order n: n rings x 2n
// azimuthal nodes) and one degree cap L <= n-1.
class SphereBasis {
 public:
  SphereBasis(std::shared_ptr<const SphereQuadrature> rule, int L)
      : rule_(std::move(rule)), L_(L), n_(rule_->order), nphi_(2 * rule_->order) {
    if (L_ > n_ - 1) throw Error("SphereBasis: degree cap needs quadrature order >= L+1");
    rings_.reserve(n_);
    ring_w_.resize(n_);
    for (int r = 0; r < n_; ++r) {
      const Vec3& v = rule_->nodes[static_cast<std::size_t>(r) * nphi_];
      const double ct = v.z;
      rings_.emplace_back(L_, ct);
      ring_w_[r] = rule_->weights[static_cast<std::size_t>(r) * nphi_] * nphi_;  // polar weight * 2pi
      sin_t_.push_back(std::sqrt(std::max(1e-300, 1.0 - ct * ct)));
    }
    cosm_.assign(static_cast<std::size_t>(L_ + 1) * nphi_, 0.0);
    sinm_.assign(cosm_.size(), 0.0);
    for (int m = 0; m <= L_; ++m)
      for (int j = 0; j < nphi_; ++j) {
        const double phi = 2.0 * kPi * j / nphi_;
        cosm_[static_cast<std::size_t>(m) * nphi_ + j] = std::cos(m * phi);
        sinm_[static_cast<std::size_t>(m) * nphi_ + j] = std::sin(m * phi);
      }
  }

  int degree_cap() const { return L_; }
  const SphereQuadrature& rule() const { return *rule_; }
  std::shared_ptr<const SphereQuadrature> rule_ptr() const { return rule_; }

  // Forward transform: coefficients of the quadrature projection.
  ShCoeffs analyze(const std::vector<double>& node_values) const {
    if (node_values.size() != rule_->size()) throw Error("SphereBasis: value count mismatch");
    ShCoeffs out;
    out.L = L_;
    out.c.assign(static_cast<std::size_t>(L_ + 1) * (L_ + 1), 0.0);
    const double dphi = 2.0 * kPi / nphi_;
    // ring Fourier moments
    std::vector<double> C(static_cast<std::size_t>(L_ + 1)), S(static_cast<std::size_t>(L_ + 1));
    for (int r = 0; r < n_; ++r) {
      const double* f = node_values.data() + static_cast<std::size_t>(r) * nphi_;
      for (int m = 0; m <= L_; ++m) {
        double cm = 0.0, sm = 0.0;
        const double* cs = cosm_.data() + static_cast<std::size_t>(m) * nphi_;
        const double* sn = sinm_.data() + static_cast<std::size_t>(m) * nphi_;
        for (int j = 0; j < nphi_; ++j) {
          cm += cs[j] * f[j];
          sm += sn[j] * f[j];
        }
        C[m] = cm * dphi;
        S[m] = sm * dphi;
      }
      const double wp = ring_w_[r] / (2.0 * kPi);  // pure polar weight
      const LegendreTable& tab = rings_[r];
      for (int l = 0; l <= L_; ++l) {
        out.ref(l, 0, false) += wp * tab.at(l, 0) * C[0];
        for (int m = 1; m <= l; ++m) {
          const double pn = tab.at(l, m) * std::sqrt(2.0);
          out.ref(l, m, false) += wp * pn * C[m];
          out.ref(l, m, true) += wp * pn * S[m];
        }
      }
    }
    return out;
  }

  // Synthesis of values at the quadrature nodes.
  std::vector<double> synthesize(const ShCoeffs& a) const {
    std::vector<double> out(rule_->size(), 0.0);
    for (int r = 0; r < n_; ++r) {
      const LegendreTable& tab = rings_[r];
      std::vector<double> C(static_cast<std::size_t>(L_ + 1), 0.0), S(C.size(), 0.0);
      for (int l = 0; l <= L_; ++l) {
        C[0] += tab.at(l, 0) * a.get(l, 0, false);
        for (int m = 1; m <= l; ++m) {
          const double pn = tab.at(l, m) * std::sqrt(2.0);
          C[m] += pn * a.get(l, m, false);
          S[m] += pn * a.get(l, m, true);
        }
      }
      double* f = out.data() + static_cast<std::size_t>(r) * nphi_;
      for (int m = 0; m <= L_; ++m) {
        const double* cs = cosm_.data() + static_cast<std::size_t>(m) * nphi_;
        const double* sn = sinm_.data() + static_cast<std::size_t>(m) * nphi_;
        for (int j = 0; j < nphi_; ++j) f[j] += C[m] * cs[j] + S[m] * sn[j];
      }
    }
    return out;
  }

  // Surface gradient at the nodes, components in the (e_theta, e_phi) frame.
  void synthesize_gradient(const ShCoeffs& a, std::vector<double>& g_theta,
                           std::vector<double>& g_phi) const {
    g_theta.assign(rule_->size(), 0.0);
    g_phi.assign(rule_->size(), 0.0);
    for (int r = 0; r < n_; ++r) {
      const LegendreTable& tab = rings_[r];
      const double inv_sin = 1.0 / sin_t_[r];
      std::vector<double> Ct(static_cast<std::size_t>(L_ + 1), 0.0), St(Ct.size(), 0.0);
      std::vector<double> Cp(Ct.size(), 0.0), Sp(Ct.size(), 0.0);
      for (int l = 0; l <= L_; ++l) {
        Ct[0] += tab.dth(l, 0) * a.get(l, 0, false);
        for (int m = 1; m <= l; ++m) {
          const double pd = tab.dth(l, m) * std::sqrt(2.0);
          const double pn = tab.at(l, m) * std::sqrt(2.0);
          Ct[m] += pd * a.get(l, m, false);
          St[m] += pd * a.get(l, m, true);
          // d/dphi: cos -> -m sin, sin -> m cos
          Cp[m] += pn * a.get(l, m, false);
          Sp[m] += pn * a.get(l, m, true);
        }
      }
      double* gt = g_theta.data() + static_cast<std::size_t>(r) * nphi_;
      double* gp = g_phi.data() + static_cast<std::size_t>(r) * nphi_;
      for (int m = 0; m <= L_; ++m) {
        const double* cs = cosm_.data() + static_cast<std::size_t>(m) * nphi_;
        const double* sn = sinm_.data() + static_cast<std::size_t>(m) * nphi_;
        for (int j = 0; j < nphi_; ++j) {
          gt[j] += Ct[m] * cs[j] + St[m] * sn[j];
          gp[j] += inv_sin * m * (Sp[m] * cs[j] - Cp[m] * sn[j]);
        }
      }
    }
  }

 private:
  std::shared_ptr<const SphereQuadrature> rule_;
  int L_, n_, nphi_;
  std::vector<LegendreTable> rings_;
  std::vector<double> ring_w_, sin_t_;
  std::vector<double> cosm_, sinm_;
};

}  // namespace iflux
