#pragma once

// Umbrella header: simulation, reconstruction and analysis of
// polarization-entangled photon pairs from a biexciton-exciton cascade.

#include "qdpair/config.hpp"
#include "qdpair/constants.hpp"
#include "qdpair/errors.hpp"
#include "qdpair/fitting.hpp"
#include "qdpair/histogram.hpp"
#include "qdpair/io.hpp"
#include "qdpair/mle.hpp"
#include "qdpair/polarization.hpp"
#include "qdpair/presets.hpp"
#include "qdpair/qkd.hpp"
#include "qdpair/quantum.hpp"
#include "qdpair/sim.hpp"
#include "qdpair/tomography.hpp"
