#pragma once

// Umbrella header for the whole toolkit.

#include "suresim/artificial.hpp"
#include "suresim/control_variates.hpp"
#include "suresim/dataset.hpp"
#include "suresim/emit.hpp"
#include "suresim/errors.hpp"
#include "suresim/ppi.hpp"
#include "suresim/resample.hpp"
#include "suresim/rng.hpp"
#include "suresim/summary.hpp"
#include "suresim/sweep.hpp"
#include "suresim/types.hpp"
#include "suresim/version.hpp"
#include "suresim/wsr.hpp"
