#pragma once

#include "structmap/planner/engine.hpp"

namespace structmap {

struct PeResult {
    bool completed = false;
    std::string status;  // completed | tick_cap | abandoned | scenario_violation
    std::vector<ScenarioViolation> violations;
    std::int64_t tau_f = 0;        // timestamp of the last perimeter viewpoint
    std::int64_t closure_tick = -1;  // matched earlier viewpoint
    double theta_final = 0.0;
    Vec2 loop_reference = Vec2::Zero();
};

/// Perimeter exploration: circle the structure clockwise, goal by goal, until
/// the swept angle completes a lap and a loop closure against an early
/// viewpoint confirms it. Populates the shared RunState (trajectory, capture
/// history, global cloud and octree, all registered with estimated poses).
PeResult run_pe(const World& world, const Scenario& scenario, RunState& state);

}  // namespace structmap
