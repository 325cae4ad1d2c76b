#include "structmap/planner/engine.hpp"

#include "structmap/planner/cavity.hpp"
#include "structmap/world/robot.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <set>

namespace structmap {

namespace {
constexpr double kTriggerMargin = 0.95;           // obstacle trigger radius vs clearance
constexpr double kTriggerCone = 75.0 * M_PI / 180.0;
constexpr double kRescanCooldown = 0.4;           // meters of travel before re-triggering
constexpr int kMaxRecoveries = 12;
}  // namespace

RunState::RunState(const Scenario& scenario, const RobotPose& start)
    : octree(scenario.planner.leaf), rng(scenario.seed) {
    true_pose = start;
    est_pose = start;
    trajectory.push_back(TrajectoryRow{0, true_pose, est_pose, ""});
}

std::optional<double> rescan_ahead_yaw(const RobotPose& est_pose, const LocalCostMap& map,
                                       double radius) {
    // Matches the forward obstacle detector's region: the nearest occupied
    // cell in the half-disc ahead of the robot.
    const auto idx = map.within(est_pose.position(), radius);
    double best_d = std::numeric_limits<double>::infinity();
    Vec2 best_cell = Vec2::Zero();
    for (int i : idx) {
        const Vec2& c = map.occupied_centers()[i];
        const Vec2 to = c - est_pose.position();
        const double bearing = wrap_angle(std::atan2(to.y(), to.x()) - est_pose.yaw_robot);
        if (std::abs(bearing) > M_PI_2) continue;
        const double d = to.norm();
        if (d < best_d) {
            best_d = d;
            best_cell = c;
        }
    }
    if (!std::isfinite(best_d)) return std::nullopt;
    return std::atan2(best_cell.y() - est_pose.y, best_cell.x() - est_pose.x);
}

ExplorationEngine::ExplorationEngine(const World& world, const Scenario& scenario,
                                     RunState& state)
    : world_(world), scn_(scenario), st_(state) {}

const Viewpoint& ExplorationEngine::capture(const std::string& event) {
    Viewpoint vp;
    vp.tick = st_.tick;
    vp.true_pose = st_.true_pose;
    vp.estimated_pose = st_.est_pose;
    vp.cloud_camera = render_depth(st_.true_pose, world_.camera, world_.structure);
    if (!event.empty()) mark_event(event);

    const PointCloud global = cloud_to_global(vp.estimated_pose, world_.camera, vp.cloud_camera);
    st_.octree.insert_cloud(vp.estimated_pose.camera_center(world_.camera), global);
    st_.global_cloud.points.insert(st_.global_cloud.points.end(), global.points.begin(),
                                   global.points.end());
    st_.recent_clouds.push_back(global);
    while (st_.recent_clouds.size() > 4) st_.recent_clouds.pop_front();

    st_.history.push_back(std::move(vp));
    return st_.history.back();
}

void ExplorationEngine::mark_event(const std::string& event) {
    if (st_.trajectory.empty()) return;
    std::string& slot = st_.trajectory.back().event;
    if (slot.empty()) slot = event;
}

PotentialParams ExplorationEngine::potential_params(double clearance) const {
    PotentialParams p;
    p.alpha = scn_.planner.alpha;
    p.beta = scn_.planner.beta;
    p.repulse_radius = clearance;
    p.step = scn_.planner.cell;
    p.rho = world_.camera.range;
    return p;
}

GoalSpec ExplorationEngine::to_global(const CameraGoal& goal_camera, const RobotPose& est_pose,
                                      double stand_off) const {
    const Mat3 r = camera_rotation(est_pose.yaw_camera);
    const Vec3 c = est_pose.camera_center(world_.camera);
    GoalSpec spec;
    spec.p_bar = r * goal_camera.p_bar + c;
    spec.p_bar.z() = world_.camera.height;  // goals live in the camera plane
    spec.n = r * goal_camera.n;
    spec.r = r * goal_camera.r;
    spec.step_len = goal_camera.step_len;
    spec.distance = stand_off;
    return spec;
}

LocalCostMap ExplorationEngine::costmap_from_recent() const {
    const Vec3 center = st_.est_pose.camera_center(world_.camera);
    std::vector<PointCloud> clouds(st_.recent_clouds.begin(), st_.recent_clouds.end());
    return LocalCostMap::build(center, clouds, world_.camera.range, scn_.planner.cell,
                               world_.camera.h_max());
}

LocalCostMap ExplorationEngine::costmap_from_octree(const Vec2& center,
                                                    double half_extent) const {
    const double res = st_.octree.resolution();
    const Vec3 lo3(center.x() - half_extent, center.y() - half_extent, 0.0);
    const Vec3 hi3(center.x() + half_extent, center.y() + half_extent, world_.camera.h_max());
    std::vector<VoxelKey> keys;
    st_.octree.occupied_leaves_in_box(st_.octree.key_for(lo3), st_.octree.key_for(hi3), keys);

    const double cell = scn_.planner.cell;
    std::set<std::pair<int, int>> cells;
    for (const VoxelKey& k : keys) {
        const Vec3 p((k.x + 0.5) * res, (k.y + 0.5) * res, (k.z + 0.5) * res);
        // Ground returns occupy the lowest voxel layer; they are floor, not
        // obstacles.
        if (p.z() <= scn_.planner.ground_eps || p.z() > world_.camera.h_max()) continue;
        cells.insert({static_cast<int>(std::floor(p.x() / cell)),
                      static_cast<int>(std::floor(p.y() / cell))});
    }
    std::vector<Vec2> centers;
    centers.reserve(cells.size());
    for (const auto& [ix, iy] : cells) {
        centers.emplace_back((ix + 0.5) * cell, (iy + 0.5) * cell);
    }
    return LocalCostMap::from_cells(center, cell, half_extent, std::move(centers));
}

void ExplorationEngine::record_row() {
    st_.trajectory.push_back(TrajectoryRow{st_.tick, st_.true_pose, st_.est_pose, ""});
}

void ExplorationEngine::step_towards(const Vec2& waypoint, double desired_cam_yaw,
                                     const PhaseConfig* cfg) {
    const PlannerParams& p = scn_.planner;
    const Vec2 to = waypoint - st_.est_position();
    const double dist = to.norm();

    MotionCommand cmd;
    if (dist > 1e-6) {
        const double heading_err = wrap_angle(std::atan2(to.y(), to.x()) - st_.est_pose.yaw_robot);
        cmd.omega = std::clamp(heading_err / p.dt, -p.omega_max, p.omega_max);
        if (std::abs(heading_err) < M_PI / 3.0) {
            const double scale = 1.0 - std::abs(heading_err) / (M_PI / 2.0);
            cmd.v = std::min(p.v_max * scale, dist / p.dt);
        }
    }

    const double moved = cmd.v * p.dt;
    step_robot(st_.true_pose, st_.est_pose, cmd, p.dt, world_.noise, st_.rng);
    dist_since_rescan_ += moved;

    const double dyaw = wrap_angle(desired_cam_yaw - st_.est_pose.yaw_camera);
    const double slew = std::clamp(dyaw, -p.camera_slew * p.dt, p.camera_slew * p.dt);
    st_.est_pose.yaw_camera = wrap_angle(st_.est_pose.yaw_camera + slew);
    st_.true_pose.yaw_camera = st_.est_pose.yaw_camera;

    ++st_.tick;
    record_row();
    if (cfg && cfg->monitor) cfg->monitor->update(st_.est_position());
}

void ExplorationEngine::tick_in_place(double desired_cam_yaw, const PhaseConfig* cfg) {
    const PlannerParams& p = scn_.planner;
    const double dyaw = wrap_angle(desired_cam_yaw - st_.est_pose.yaw_camera);
    const double slew = std::clamp(dyaw, -p.camera_slew * p.dt, p.camera_slew * p.dt);
    st_.est_pose.yaw_camera = wrap_angle(st_.est_pose.yaw_camera + slew);
    st_.true_pose.yaw_camera = st_.est_pose.yaw_camera;
    ++st_.tick;
    record_row();
    if (cfg && cfg->monitor) cfg->monitor->update(st_.est_position());
}

bool ExplorationEngine::slew_camera_to(double target_yaw, const PhaseConfig* cfg,
                                       std::int64_t tick_limit) {
    while (std::abs(wrap_angle(target_yaw - st_.est_pose.yaw_camera)) > 0.03) {
        if (st_.tick >= tick_limit) return false;
        tick_in_place(target_yaw, cfg);
    }
    return true;
}

bool ExplorationEngine::rescan(const LocalCostMap& map, const PhaseConfig& cfg,
                               std::optional<double> fallback_yaw) {
    auto yaw = rescan_ahead_yaw(st_.est_pose, map, cfg.stand_off);
    if (!yaw) yaw = fallback_yaw;
    if (!yaw) return false;  // spurious trigger, resume
    mark_event("rescan");
    ++st_.rescan_count;
    dist_since_rescan_ = 0.0;
    if (!slew_camera_to(*yaw, &cfg, cfg.tick_limit)) return false;
    capture("");
    pending_capture_ = static_cast<int>(st_.history.size()) - 1;
    return true;
}

ExplorationEngine::FollowOutcome ExplorationEngine::follow(const std::vector<Vec2>& polyline,
                                                           double desired_cam_yaw,
                                                           const PhaseConfig& cfg,
                                                           double trigger_radius) {
    if (polyline.empty()) return FollowOutcome::Blocked;
    const PlannerParams& p = scn_.planner;
    std::size_t index = 0;
    int ticks_since_capture = 0;
    double yaw_at_capture = st_.est_pose.yaw_camera;

    while (true) {
        if (st_.tick >= cfg.tick_limit) return FollowOutcome::TickCap;

        // Look ahead several cells so band-edge chatter in the descent
        // polyline does not translate into swerving.
        while (index + 1 < polyline.size() &&
               (polyline[index] - st_.est_position()).norm() < 5.0 * p.cell) {
            ++index;
        }
        if ((polyline.back() - st_.est_position()).norm() < 1.5 * p.cell) {
            return FollowOutcome::Arrived;
        }

        if (dist_since_rescan_ > kRescanCooldown) {
            const auto hit = detect_obstacle_ahead(st_.true_pose, kTriggerMargin * trigger_radius,
                                                   world_.structure);
            if (hit && std::abs(hit->bearing) <= kTriggerCone) {
                if (rescan(costmap_from_octree(st_.est_position(), world_.camera.range), cfg,
                           st_.est_pose.yaw_robot + hit->bearing)) {
                    return FollowOutcome::Obstacle;
                }
                dist_since_rescan_ = 0.0;  // spurious; resume with cooldown
            }
        }

        step_towards(polyline[index], desired_cam_yaw, &cfg);

        // Capture on a distance cadence, and additionally whenever the view
        // has swung enough that skipping it would leave unseen wedges.
        const bool swung =
            std::abs(wrap_angle(st_.est_pose.yaw_camera - yaw_at_capture)) > 0.15;
        if (++ticks_since_capture >= p.capture_period || swung) {
            ticks_since_capture = 0;
            yaw_at_capture = st_.est_pose.yaw_camera;
            const Viewpoint& vp = capture("");
            if (cfg.on_capture) cfg.on_capture(vp);
            if (cfg.should_stop && cfg.should_stop(vp)) return FollowOutcome::Stop;
        }
    }
}

ExplorationEngine::PhaseOutcome ExplorationEngine::run_phase(const PhaseConfig& cfg) {
    const PlannerParams& p = scn_.planner;
    int recoveries = 0;
    Vec2 last_recovery_pos = st_.est_position();
    // Recoveries (skips, rescued stalls) only count as trouble while the
    // robot is pinned in place; covering ground resets the tally.
    const auto note_recovery = [&] {
        if ((st_.est_position() - last_recovery_pos).norm() > 1.5) recoveries = 0;
        ++recoveries;
        last_recovery_pos = st_.est_position();
    };
    last_delta_ = cfg.adapt_clearance ? cfg.stand_off : 0.0;

    while (true) {
        if (st_.tick >= cfg.tick_limit) return PhaseOutcome::TickCap;
        if (recoveries > kMaxRecoveries) return PhaseOutcome::Abandoned;

        const Viewpoint& vp = pending_capture_ >= 0
                                  ? st_.history[pending_capture_]
                                  : capture("");
        pending_capture_ = -1;
        if (cfg.on_capture) cfg.on_capture(vp);
        if (cfg.should_stop && cfg.should_stop(vp)) return PhaseOutcome::Terminated;

        // Next goal from the current view; a degenerate forward slice widens
        // to half the cloud once.
        std::optional<GoalSpec> spec;
        try {
            spec = to_global(compute_next_goal(vp.cloud_camera, cfg.stand_off,
                                               world_.camera.height, p.ground_eps),
                             vp.estimated_pose, cfg.stand_off);
        } catch (const DegenerateSlice&) {
            try {
                spec = to_global(compute_next_goal(vp.cloud_camera, cfg.stand_off,
                                                   world_.camera.height, p.ground_eps, 0.5),
                                 vp.estimated_pose, cfg.stand_off);
            } catch (const Error&) {
            }
        } catch (const EmptyAfterGroundRemoval&) {
        }

        // Plan against the model (octree) around the camera, not just the
        // last frames: clearance adaptation needs the walls behind us too.
        const LocalCostMap map = costmap_from_octree(st_.est_position(), world_.camera.range);

        std::vector<Vec2> polyline;
        double clearance = cfg.stand_off;
        double desired_yaw = st_.est_pose.yaw_camera;

        if (!spec) {
            // Structure lost from view: turn toward the nearest mapped cell
            // and rescan; failing that, press on along the last travel
            // direction.
            note_recovery();
            if (dist_since_rescan_ > kRescanCooldown && rescan(map, cfg, std::nullopt)) {
                continue;
            }
            if (!last_spec_) return PhaseOutcome::Abandoned;
            const Vec2 dir = last_spec_->r.head<2>().normalized();
            const Vec2 target = st_.est_position() +
                                std::max(last_spec_->step_len, 0.5 * cfg.stand_off) * dir;
            polyline = plan_to_point(st_.est_position(), target, map,
                                     potential_params(cfg.stand_off))
                           .polyline;
            desired_yaw = yaw_of(last_spec_->n);
        } else {
            last_spec_ = spec;
            desired_yaw = yaw_of(spec->n);
            if (std::getenv("STRUCTMAP_TRACE")) {
                std::fprintf(stderr,
                             "[%lld] pos=(%.2f,%.2f) cam=%.2f pbar=(%.2f,%.2f) n=(%.2f,%.2f) "
                             "step=%.2f goal=(%.2f,%.2f) clr=%.2f\n",
                             (long long)st_.tick, st_.est_pose.x, st_.est_pose.y,
                             st_.est_pose.yaw_camera, spec->p_bar.x(), spec->p_bar.y(),
                             spec->n.x(), spec->n.y(), spec->step_len, spec->point2().x(),
                             spec->point2().y(), map.clearance(spec->point2()));
            }

            if (cfg.adapt_clearance) {
                const auto delta =
                    adapt_delta(*spec, map, potential_params(cfg.stand_off), p.delta_min,
                                p.delta_step, cfg.stand_off);
                if (!delta) return PhaseOutcome::Abandoned;  // cavity too narrow
                clearance = *delta;
                last_delta_ = std::min(last_delta_, *delta);
            }

            GoalSpec used = *spec;
            used.distance = clearance;
            LocalPath path = plan_local_path(st_.est_position(), used, map,
                                             potential_params(clearance));

            // Perimeter mode only follows paths that keep the stand-off: a
            // path squeezing through a mouth narrower than 2D dips well below
            // it, which is exactly the situation the perimeter phase skips
            // across (cavity mode adapts the clearance instead).
            bool dive_blocked = false;
            if (!cfg.adapt_clearance) {
                for (const Vec2& q : path.polyline) {
                    if (map.clearance(q) < cfg.stand_off - 4.0 * p.cell) {
                        dive_blocked = true;
                        break;
                    }
                }
                if (map.clearance(path.goal) < cfg.stand_off - 2.0 * p.cell) {
                    dive_blocked = true;
                }
            }

            if (dive_blocked) {
                // Skip across, continuing the last committed travel direction
                // (the dive goal's own direction points into the mouth).
                note_recovery();
                const GoalSpec& ref = band_spec_ ? *band_spec_ : *spec;
                const Vec2 dir = ref.r.head<2>().normalized();
                const Vec2 target = st_.est_position() +
                                    std::max(ref.step_len, 0.5 * cfg.stand_off) * dir;
                path = plan_to_point(st_.est_position(), target, map,
                                     potential_params(cfg.stand_off));
                desired_yaw = yaw_of(ref.n);
            } else if (path.status == PathStatus::Stuck && path.polyline.size() < 4) {
                note_recovery();
                // One rescan per spot: a second with the camera already on
                // target would recompute the same stuck goal forever.
                if (dist_since_rescan_ > kRescanCooldown && rescan(map, cfg, std::nullopt)) {
                    continue;
                }
                const Vec2 dir = spec->r.head<2>().normalized();
                const Vec2 target =
                    st_.est_position() + std::max(spec->step_len, 0.5 * cfg.stand_off) * dir;
                path = plan_to_point(st_.est_position(), target, map,
                                     potential_params(cfg.stand_off));
            } else {
                recoveries = 0;
                band_spec_ = spec;
            }

            if (path.polyline.size() < 4) {
                // Every plan from here stalls immediately: the robot sits in
                // a repulsion saddle (for instance between two mouth lips).
                // Back straight out along the net repulsion to regain the
                // stand-off band, then replan.
                const GradientResult repulsion = potential_gradient(
                    st_.est_position(), st_.est_position(), map,
                    potential_params(cfg.stand_off));
                if (repulsion.neg_grad.norm() > 1e-9) {
                    const Vec2 out = repulsion.neg_grad.normalized();
                    path.polyline = {st_.est_position(), st_.est_position() + 0.5 * out,
                                     st_.est_position() + 1.0 * out};
                }
            }
            polyline = std::move(path.polyline);
            mark_event("goal");
        }

        const FollowOutcome fo = follow(polyline, desired_yaw, cfg, clearance);
        switch (fo) {
            case FollowOutcome::Stop: return PhaseOutcome::Terminated;
            case FollowOutcome::TickCap: return PhaseOutcome::TickCap;
            case FollowOutcome::Blocked:
                note_recovery();
                if (!rescan(map, cfg, std::nullopt)) {
                    tick_in_place(desired_yaw, &cfg);
                }
                break;
            case FollowOutcome::Obstacle:
            case FollowOutcome::Arrived:
                break;
        }
    }
}

bool ExplorationEngine::navigate_to(const Vec2& target, double target_cam_yaw,
                                    std::int64_t tick_limit, std::size_t retrace_rows,
                                    const PhaseConfig* capture_hooks, double repulse_radius) {
    const PlannerParams& p = scn_.planner;
    if (repulse_radius <= 0.0) repulse_radius = p.distance;

    const auto drive_along = [&](const std::vector<Vec2>& polyline) {
        std::size_t index = 0;
        while (st_.tick < tick_limit) {
            while (index + 1 < polyline.size() &&
                   (polyline[index] - st_.est_position()).norm() < 5.0 * p.cell) {
                ++index;
            }
            if ((target - st_.est_position()).norm() < 3.0 * p.cell) return true;
            if (index + 1 >= polyline.size() &&
                (polyline.back() - st_.est_position()).norm() < 1.5 * p.cell) {
                return (target - st_.est_position()).norm() < 3.0 * p.cell;
            }
            const double travel = yaw_of(Vec3(polyline[index].x() - st_.est_position().x(),
                                              polyline[index].y() - st_.est_position().y(),
                                              0.0));
            step_towards(polyline[index], travel, capture_hooks);
            if (st_.tick % p.capture_period == 0) {
                const Viewpoint& vp = capture("");
                if (capture_hooks && capture_hooks->on_capture) capture_hooks->on_capture(vp);
            }
        }
        return false;
    };

    // Direct potential-field leg, when it reaches in one go.
    if ((target - st_.est_position()).norm() >= 3.0 * p.cell) {
        const double span = (target - st_.est_position()).norm() + 2.0 * world_.camera.range;
        const Vec2 mid = 0.5 * (target + st_.est_position());
        const LocalCostMap map = costmap_from_octree(mid, 0.5 * span + world_.camera.range);
        const LocalPath path = plan_to_point(st_.est_position(), target, map,
                                             potential_params(repulse_radius));
        if (path.status == PathStatus::Reached) {
            if (!drive_along(path.polyline)) return false;
        }
    }

    // Retrace the recorded free path to the row closest to the target.
    if ((target - st_.est_position()).norm() >= 3.0 * p.cell && retrace_rows > 1) {
        const auto rows =
            std::span<const TrajectoryRow>(st_.trajectory)
                .first(std::min(retrace_rows, st_.trajectory.size()));
        std::size_t here = 0, there = 0;
        double best_here = std::numeric_limits<double>::infinity();
        double best_there = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Vec2 pos = rows[i].est_pose.position();
            const double dh = (pos - st_.est_position()).norm();
            const double dt_ = (pos - target).norm();
            if (dh < best_here) {
                best_here = dh;
                here = i;
            }
            if (dt_ < best_there) {
                best_there = dt_;
                there = i;
            }
        }
        std::vector<Vec2> waypoints;
        Vec2 last = st_.est_position();
        const int dir = there >= here ? 1 : -1;
        for (std::size_t i = here;; i += dir) {
            const Vec2 pos = rows[i].est_pose.position();
            if ((pos - last).norm() > 0.3) {
                waypoints.push_back(pos);
                last = pos;
            }
            if (i == there) break;
        }
        waypoints.push_back(target);
        std::size_t wp_index = 0;
        while (st_.tick < tick_limit &&
               (target - st_.est_position()).norm() >= 3.0 * p.cell) {
            while (wp_index + 1 < waypoints.size() &&
                   (waypoints[wp_index] - st_.est_position()).norm() < 5.0 * p.cell) {
                ++wp_index;
            }
            const Vec2& wp = waypoints[wp_index];
            const double travel = yaw_of(
                Vec3(wp.x() - st_.est_position().x(), wp.y() - st_.est_position().y(), 0.0));
            step_towards(wp, travel, capture_hooks);
            if (st_.tick % p.capture_period == 0) {
                const Viewpoint& vp = capture("");
                if (capture_hooks && capture_hooks->on_capture) capture_hooks->on_capture(vp);
            }
        }
    }

    if ((target - st_.est_position()).norm() >= 3.0 * p.cell) return false;
    return slew_camera_to(target_cam_yaw, capture_hooks, tick_limit);
}

}  // namespace structmap
