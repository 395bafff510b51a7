#pragma once

#include "chemosched/types.hpp"

#include <string>

namespace chemosched {

// Standalone SVG: one row per chair with treatment bars, one row per nurse
// with pre-medication bars and gray observation spans, hour gridlines and a
// marked shift end.
std::string render_gantt_svg(const Instance& inst, const FirstStageSchedule& schedule,
                             const Scenario& scen, const SecondStageOutcome& outcome,
                             const std::string& title);

} // namespace chemosched
