#pragma once

// Umbrella header for the touchsim library.

#include "calibration.hpp"
#include "core.hpp"
#include "engine.hpp"
#include "fill_model.hpp"
#include "io.hpp"
#include "market_model.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "strategy.hpp"
#include "theory.hpp"
