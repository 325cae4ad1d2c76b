#include "structmap/planner/perimeter.hpp"

namespace structmap {

PeResult run_pe(const World& world, const Scenario& scenario, RunState& state) {
    PeResult result;
    result.violations =
        validate_scenario(world.structure, scenario.start.robot_pose(), world.camera);
    if (!result.violations.empty()) {
        result.status = "scenario_violation";
        return result;
    }

    ExplorationEngine engine(world, scenario, state);
    const Viewpoint& first = engine.capture("goal");

    // Loop reference: centroid of the first structure points, on the ground.
    Vec3 p_sum = Vec3::Zero();
    int p_count = 0;
    const PointCloud first_global =
        cloud_to_global(first.estimated_pose, world.camera, first.cloud_camera);
    for (const Vec3& p : first_global.points) {
        if (p.z() >= scenario.planner.ground_eps) {
            p_sum += p;
            ++p_count;
        }
    }
    if (p_count == 0) {
        result.status = "scenario_violation";
        result.violations.push_back({"IC2", "first depth image holds no structure points"});
        return result;
    }
    result.loop_reference = Vec2(p_sum.x() / p_count, p_sum.y() / p_count);

    LoopMonitor monitor(result.loop_reference, state.est_position());

    ClosureParams closure;
    closure.max_distance = 0.5 * scenario.planner.distance;

    ExplorationEngine::PhaseConfig cfg;
    cfg.stand_off = scenario.planner.distance;
    cfg.tick_limit = scenario.planner.tick_cap;
    cfg.monitor = &monitor;
    cfg.should_stop = [&](const Viewpoint& vp) {
        if (!monitor.lap_done()) return false;
        const auto match =
            detect_loop_closure(vp, state.history, state.octree, world.camera, closure);
        if (!match) return false;
        result.closure_tick = *match;
        engine.mark_event("closure");
        return true;
    };

    const auto outcome = engine.run_phase(cfg);
    result.theta_final = monitor.theta();
    result.tau_f = state.history.empty() ? 0 : state.history.back().tick;
    switch (outcome) {
        case ExplorationEngine::PhaseOutcome::Terminated:
            result.completed = true;
            result.status = "completed";
            break;
        case ExplorationEngine::PhaseOutcome::TickCap:
            result.status = "tick_cap";
            break;
        case ExplorationEngine::PhaseOutcome::Abandoned:
            result.status = "abandoned";
            break;
    }
    return result;
}

}  // namespace structmap
