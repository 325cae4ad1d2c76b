#pragma once

#include "structmap/fbe/grid2d.hpp"
#include "structmap/planner/engine.hpp"

namespace structmap {

struct FbeResult {
    bool completed = false;
    std::string status;
    std::vector<ScenarioViolation> violations;
    int goals_attempted = 0;
    int stuck_events = 0;
};

/// Classic nearest-frontier exploration over a 2D grid bounded by a
/// user-supplied polygon. Uses the same sensing and motion stack as the
/// proposed policy but navigates with a tighter (0.5*D) stand-off and keeps
/// the camera facing the direction of travel. Ends when no frontier remains
/// inside the polygon; unreachable frontiers are blacklisted.
FbeResult run_fbe(const World& world, const Scenario& scenario, RunState& state);

}  // namespace structmap
