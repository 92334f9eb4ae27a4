#pragma once

// Umbrella header: vortex dipole dynamics, scattering relation and the
// linearized reconstruction of a weak background potential.

#include "dipole/config.hpp"
#include "dipole/dynamics.hpp"
#include "dipole/errors.hpp"
#include "dipole/io.hpp"
#include "dipole/ode.hpp"
#include "dipole/parallel.hpp"
#include "dipole/pipeline.hpp"
#include "dipole/potential.hpp"
#include "dipole/quadrature.hpp"
#include "dipole/reconstruction.hpp"
#include "dipole/scattering.hpp"
#include "dipole/vec2.hpp"
#include "dipole/verification.hpp"
