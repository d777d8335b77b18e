#pragma once

#include <stdexcept>
#include <string>

namespace iflux {

// Base for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Evaluation requested on a declared singular locus.
struct SingularPointError : Error {
  using Error::Error;
};

// Point or region outside the field's declared box.
struct OutOfDomainError : Error {
  using Error::Error;
};

// A declared singular locus touches the sphere surface within tolerance.
struct SingularOnSphereError : Error {
  using Error::Error;
};

// Refinement did not converge: the integrand is not L^p at this exponent,
// or the configured budget was exceeded.
struct NonFiniteError : Error {
  using Error::Error;
};

struct DegenerateDipoleError : Error {
  using Error::Error;
};

struct ResourceLimitError : Error {
  using Error::Error;
};

// Poisson right-hand side has nonzero mean.
struct NonZeroMeanError : Error {
  using Error::Error;
};

struct IncompatibleChargesError : Error {
  using Error::Error;
};

struct NoConvergenceError : Error {
  using Error::Error;
};

struct TooFewRadiiError : Error {
  using Error::Error;
};

// Malformed or truncated input file.
struct FormatError : Error {
  using Error::Error;
};

}  // namespace iflux
