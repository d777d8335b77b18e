#pragma once

// Integer-flux vector field toolkit: membership testing by sphere
// quadrature, explicit monopole/dipole/lattice families, slice metrics and
// maximal-function estimates, and divergence-constrained L^p minimization.

#include "iflux/errors.hpp"
#include "iflux/fft.hpp"
#include "iflux/field.hpp"
#include "iflux/fld_io.hpp"
#include "iflux/grid.hpp"
#include "iflux/json_writer.hpp"
#include "iflux/lp_norm.hpp"
#include "iflux/maximal.hpp"
#include "iflux/measures.hpp"
#include "iflux/metric.hpp"
#include "iflux/minimize.hpp"
#include "iflux/quadrature.hpp"
#include "iflux/rng.hpp"
#include "iflux/slicing.hpp"
#include "iflux/sph_harm.hpp"
#include "iflux/sphere_form.hpp"
#include "iflux/synthesis.hpp"
#include "iflux/vec3.hpp"
