#pragma once

#include <memory>
#include <vector>

#include "iflux/errors.hpp"
#include "iflux/quadrature.hpp"

namespace iflux {

// Scalar density on S^2 sampled on a quadrature grid; stored per unit solid
// angle, so integral() needs no extra Jacobian. radius/center record which
// sphere the form came from.
struct SphereForm {
  std::vector<double> values;
  std::shared_ptr<const SphereQuadrature> quadrature;
  double radius = 0.0;
  Vec3 center{0, 0, 0};

  void validate() const {
    if (!quadrature) throw Error("SphereForm: missing quadrature");
    if (values.size() != quadrature->size())
      throw Error("SphereForm: value count does not match quadrature");
  }
};

inline double integral(const SphereForm& form) {
  form.validate();
  double acc = 0.0;
  for (std::size_t i = 0; i < form.values.size(); ++i)
    acc += form.quadrature->weights[i] * form.values[i];
  return acc;
}

// L^p(S^2) energy: sum of w_i |v_i|^p (the p-th power of the norm).
inline double lp_energy(const SphereForm& form, double p) {
  form.validate();
  double acc = 0.0;
  for (std::size_t i = 0; i < form.values.size(); ++i)
    acc += form.quadrature->weights[i] * std::pow(std::abs(form.values[i]), p);
  return acc;
}

inline double lp_norm(const SphereForm& form, double p) {
  return std::pow(lp_energy(form, p), 1.0 / p);
}

}  // namespace iflux
