#pragma once

// Umbrella header.

#include "ptngarch/dgp.hpp"
#include "ptngarch/error.hpp"
#include "ptngarch/estimate.hpp"
#include "ptngarch/inference.hpp"
#include "ptngarch/io.hpp"
#include "ptngarch/likelihood.hpp"
#include "ptngarch/linalg.hpp"
#include "ptngarch/montecarlo.hpp"
#include "ptngarch/network.hpp"
#include "ptngarch/optimize.hpp"
#include "ptngarch/panel.hpp"
#include "ptngarch/params.hpp"
#include "ptngarch/rng.hpp"
#include "ptngarch/special.hpp"
