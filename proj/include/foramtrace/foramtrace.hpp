// Umbrella header.
#pragma once

#include "foramtrace/grid.hpp"
#include "foramtrace/labeling.hpp"
#include "foramtrace/losses.hpp"
#include "foramtrace/metrics.hpp"
#include "foramtrace/morphology.hpp"
#include "foramtrace/nrrd.hpp"
#include "foramtrace/ordering.hpp"
#include "foramtrace/pipelines.hpp"
#include "foramtrace/rag_gasp.hpp"
#include "foramtrace/synth.hpp"
#include "foramtrace/watershed.hpp"

namespace foramtrace {
inline constexpr const char* kVersion = "0.1.0";
}
