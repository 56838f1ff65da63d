#pragma once

// Umbrella header for the thermonu library: characterization of
// ambient-temperature-dependent nonuniformity in microbolometer cameras,
// forward synthesis of degraded gray-level frames, dataset generation,
// closed-form temperature estimation, and evaluation metrics.

#include "thermonu/basis.hpp"
#include "thermonu/characterize.hpp"
#include "thermonu/dataset.hpp"
#include "thermonu/errors.hpp"
#include "thermonu/estimate.hpp"
#include "thermonu/frameio.hpp"
#include "thermonu/metrics.hpp"
#include "thermonu/model_io.hpp"
#include "thermonu/parallel.hpp"
#include "thermonu/polyfit.hpp"
#include "thermonu/rng.hpp"
#include "thermonu/selfcal.hpp"
#include "thermonu/simulate.hpp"
#include "thermonu/smoothing.hpp"
#include "thermonu/types.hpp"
