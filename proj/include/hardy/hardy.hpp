#pragma once

// Umbrella header for the whole library.

#include "hardy/atoms.hpp"
#include "hardy/config.hpp"
#include "hardy/error.hpp"
#include "hardy/experiments.hpp"
#include "hardy/fft.hpp"
#include "hardy/grid.hpp"
#include "hardy/io.hpp"
#include "hardy/maximal.hpp"
#include "hardy/moments.hpp"
#include "hardy/operators.hpp"
#include "hardy/report.hpp"

namespace hardy {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hardy
