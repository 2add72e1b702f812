#pragma once

// Utility-based distributed circumnavigation: coordinate geometry, ring
// formations, the per-robot control law, a deterministic simulator, and the
// spectral / order-preservation certificates.

#include "circumnav/analysis.hpp"
#include "circumnav/control.hpp"
#include "circumnav/errors.hpp"
#include "circumnav/formation.hpp"
#include "circumnav/geometry.hpp"
#include "circumnav/matrix.hpp"
#include "circumnav/scenario_io.hpp"
#include "circumnav/simulation.hpp"
#include "circumnav/trajectory_io.hpp"
