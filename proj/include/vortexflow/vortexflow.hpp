#pragma once

// Pseudo-spectral frozen-velocity solvers for the vorticity form of the
// incompressible Navier-Stokes equations on the periodic torus, deterministic
// (2D/3D) and stochastic with additive noise (2D), plus the Feynman-Kac
// probabilistic engine for the per-step linear parabolic systems and the
// convergence/verification harnesses.

#include "vortexflow/biot_savart.hpp"
#include "vortexflow/brownian.hpp"
#include "vortexflow/config.hpp"
#include "vortexflow/convergence.hpp"
#include "vortexflow/errors.hpp"
#include "vortexflow/feynman_kac.hpp"
#include "vortexflow/fft.hpp"
#include "vortexflow/field.hpp"
#include "vortexflow/forcing.hpp"
#include "vortexflow/grid.hpp"
#include "vortexflow/noise.hpp"
#include "vortexflow/operators.hpp"
#include "vortexflow/oracles.hpp"
#include "vortexflow/parallel.hpp"
#include "vortexflow/random_fields.hpp"
#include "vortexflow/report.hpp"
#include "vortexflow/rng.hpp"
#include "vortexflow/snapshot.hpp"
#include "vortexflow/snse.hpp"
#include "vortexflow/stepper.hpp"
