#pragma once

// Umbrella header for the SPAARC edge-cache simulation toolkit.

#include "spaarc/arm.hpp"
#include "spaarc/cache.hpp"
#include "spaarc/domain.hpp"
#include "spaarc/experiment.hpp"
#include "spaarc/geometry.hpp"
#include "spaarc/prefetcher.hpp"
#include "spaarc/rng.hpp"
#include "spaarc/simulation.hpp"
#include "spaarc/trace_io.hpp"
#include "spaarc/tuner.hpp"
#include "spaarc/workload.hpp"
