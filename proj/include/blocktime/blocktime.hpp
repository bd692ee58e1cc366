#pragma once

// Umbrella header for the full library.

#include "blocktime/analysis.hpp"
#include "blocktime/config.hpp"
#include "blocktime/csv.hpp"
#include "blocktime/difficulty.hpp"
#include "blocktime/entropy.hpp"
#include "blocktime/errors.hpp"
#include "blocktime/ingest.hpp"
#include "blocktime/mining.hpp"
#include "blocktime/netsim.hpp"
#include "blocktime/rng.hpp"
#include "blocktime/stats.hpp"
