#include "structmap/fbe/explorer.hpp"

#include "structmap/world/robot.hpp"
#include "structmap/world/sensors.hpp"

#include <algorithm>

namespace structmap {

namespace {

struct FbeDriver {
    const World& world;
    const Scenario& scn;
    RunState& st;
    Grid2D& grid;

    void record_row() {
        st.trajectory.push_back(TrajectoryRow{st.tick, st.true_pose, st.est_pose, ""});
    }

    void capture() {
        Viewpoint vp;
        vp.tick = st.tick;
        vp.true_pose = st.true_pose;
        vp.estimated_pose = st.est_pose;
        vp.cloud_camera = render_depth(st.true_pose, world.camera, world.structure);
        const PointCloud global =
            cloud_to_global(vp.estimated_pose, world.camera, vp.cloud_camera);
        st.octree.insert_cloud(vp.estimated_pose.camera_center(world.camera), global);
        st.global_cloud.points.insert(st.global_cloud.points.end(), global.points.begin(),
                                      global.points.end());
        grid.update_from_capture(vp.estimated_pose.position(), global, world.camera.h_max(),
                                 scn.planner.ground_eps);
        st.history.push_back(std::move(vp));
    }

    void step(const Vec2& waypoint) {
        const PlannerParams& p = scn.planner;
        const Vec2 to = waypoint - st.est_position();
        const double dist = to.norm();
        MotionCommand cmd;
        double desired_cam = st.est_pose.yaw_camera;
        if (dist > 1e-6) {
            const double heading = std::atan2(to.y(), to.x());
            const double err = wrap_angle(heading - st.est_pose.yaw_robot);
            cmd.omega = std::clamp(err / p.dt, -p.omega_max, p.omega_max);
            if (std::abs(err) < M_PI / 3.0) {
                cmd.v = std::min(p.v_max * (1.0 - std::abs(err) / (M_PI / 2.0)), dist / p.dt);
            }
            desired_cam = heading;  // camera faces the direction of motion
        }
        step_robot(st.true_pose, st.est_pose, cmd, p.dt, world.noise, st.rng);
        const double dyaw = wrap_angle(desired_cam - st.est_pose.yaw_camera);
        const double slew = std::clamp(dyaw, -p.camera_slew * p.dt, p.camera_slew * p.dt);
        st.est_pose.yaw_camera = wrap_angle(st.est_pose.yaw_camera + slew);
        st.true_pose.yaw_camera = st.est_pose.yaw_camera;
        ++st.tick;
        record_row();
    }
};

}  // namespace

FbeResult run_fbe(const World& world, const Scenario& scenario, RunState& state) {
    FbeResult result;
    result.violations =
        validate_scenario(world.structure, scenario.start.robot_pose(), world.camera);
    if (!result.violations.empty()) {
        result.status = "scenario_violation";
        return result;
    }

    const PlannerParams& p = scenario.planner;
    const auto polygon = scenario.fbe_polygon_or_default(world.structure);
    Vec2 lo = polygon.front(), hi = polygon.front();
    for (const Vec2& v : polygon) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    Grid2D grid(lo - Vec2::Constant(p.cell), hi + Vec2::Constant(p.cell), p.cell);

    FbeDriver driver{world, scenario, state, grid};
    driver.capture();

    std::vector<std::pair<int, int>> blacklist;
    PotentialParams pparams;
    pparams.alpha = p.alpha;
    pparams.beta = p.beta;
    pparams.repulse_radius = 0.5 * p.distance;  // FBE waypoints hug the structure
    pparams.step = p.cell;
    pparams.rho = world.camera.range;

    while (true) {
        if (state.tick >= p.tick_cap) {
            result.status = "tick_cap";
            return result;
        }
        const auto clusters =
            grid.extract_frontiers(polygon, state.est_position(), blacklist);
        if (clusters.empty()) {
            result.completed = true;
            result.status = "completed";
            return result;
        }
        ++result.goals_attempted;
        const FrontierCluster& target = clusters.front();

        const double span = (target.centroid - state.est_position()).norm();
        const LocalCostMap map = LocalCostMap::from_cells(
            state.est_position(), p.cell, span + 2.0 * world.camera.range,
            grid.occupied_centers());
        const LocalPath path =
            plan_to_point(state.est_position(), target.centroid, map, pparams);

        bool progressed = false;
        if (path.status != PathStatus::Stuck || path.polyline.size() > 8) {
            std::size_t index = 0;
            int since_capture = 0;
            int stall = 0;
            Vec2 last_pos = state.est_position();
            while (state.tick < p.tick_cap) {
                while (index + 1 < path.polyline.size() &&
                       (path.polyline[index] - state.est_position()).norm() < 2.0 * p.cell) {
                    ++index;
                }
                if ((path.polyline.back() - state.est_position()).norm() < 1.5 * p.cell) {
                    progressed = true;
                    break;
                }
                driver.step(path.polyline[index]);
                if (++since_capture >= p.capture_period) {
                    since_capture = 0;
                    driver.capture();
                    if ((state.est_position() - last_pos).norm() < 0.05) {
                        if (++stall > 6) break;  // wedged against the structure
                    } else {
                        stall = 0;
                        progressed = true;
                    }
                    last_pos = state.est_position();
                }
            }
            driver.capture();
        }
        if (!progressed) {
            ++result.stuck_events;
            blacklist.push_back(target.cells.front());
        } else {
            blacklist.clear();  // fresh knowledge may free old frontiers
        }
    }
}

}  // namespace structmap
