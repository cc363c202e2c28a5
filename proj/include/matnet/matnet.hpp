#pragma once

// Umbrella header: analysis and design of noise-driven consensus on graphs
// with matrix-valued edge weights and per-substate agent time scales.

#include "matnet/csv.hpp"
#include "matnet/design.hpp"
#include "matnet/double_integrator.hpp"
#include "matnet/edge_transform.hpp"
#include "matnet/errors.hpp"
#include "matnet/flocking.hpp"
#include "matnet/generators.hpp"
#include "matnet/graph.hpp"
#include "matnet/graph_io.hpp"
#include "matnet/h2.hpp"
#include "matnet/incidence.hpp"
#include "matnet/linalg.hpp"
#include "matnet/lyapunov.hpp"
#include "matnet/manifest.hpp"
#include "matnet/pipeline.hpp"
#include "matnet/rng.hpp"
#include "matnet/tolerances.hpp"
