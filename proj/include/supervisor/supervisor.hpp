#pragma once

// Umbrella header for the trajectory verification engine.

#include "supervisor/checks.hpp"
#include "supervisor/engine.hpp"
#include "supervisor/geometry.hpp"
#include "supervisor/harness.hpp"
#include "supervisor/report.hpp"
#include "supervisor/scenario.hpp"
#include "supervisor/text.hpp"
#include "supervisor/track.hpp"
#include "supervisor/types.hpp"
