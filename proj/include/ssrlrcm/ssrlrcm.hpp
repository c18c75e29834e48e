#pragma once

// Umbrella header.

#include "ssrlrcm/bench.hpp"
#include "ssrlrcm/data.hpp"
#include "ssrlrcm/ensemble.hpp"
#include "ssrlrcm/hmatrix.hpp"
#include "ssrlrcm/kernels.hpp"
#include "ssrlrcm/numerics.hpp"
#include "ssrlrcm/ssr.hpp"
