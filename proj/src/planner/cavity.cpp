#include "structmap/planner/cavity.hpp"

#include "structmap/geometry/cluster.hpp"
#include "structmap/geometry/kdtree.hpp"

#include <algorithm>
#include <iostream>

namespace structmap {

namespace {
constexpr double kTrajectoryExclusion = 2.0;  // meters, horizontal
}

std::vector<CavityEntrance> detect_cavity_entrances(const OccupancyOctree& octree, double d0,
                                                    double normal_tol, int min_size,
                                                    std::span<const TrajectoryRow> trajectory,
                                                    double structure_margin) {
    const auto frontier = extract_frontier_voxels(octree);

    std::optional<KdTree> path_tree;
    if (!trajectory.empty()) {
        std::vector<Vec3> path_pts;
        path_pts.reserve(trajectory.size());
        for (const auto& row : trajectory) {
            path_pts.emplace_back(row.est_pose.x, row.est_pose.y, 0.0);
        }
        path_tree.emplace(std::move(path_pts));
    }

    // Cavities are missing portions of the structure, so candidates must lie
    // within the mapped structure's horizontal extent (ground returns are not
    // structure). Frontier sheets out in the open field are range-limit
    // boundaries of the explored area, not entrances.
    const double res = octree.resolution();
    Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
    octree.for_each_region([&](const VoxelKey& k, int level, VoxelState state) {
        if (state != VoxelState::Occupied) return;
        const std::int32_t span = std::int32_t{1} << level;
        if ((k.z + span) * res <= 0.1) return;  // ground sheet
        lo = lo.cwiseMin(Vec2(k.x * res, k.y * res));
        hi = hi.cwiseMax(Vec2((k.x + span) * res, (k.y + span) * res));
    });
    lo -= Vec2::Constant(structure_margin);
    hi += Vec2::Constant(structure_margin);

    std::vector<const FrontierVoxel*> candidates;
    const double max_nz = std::sin(normal_tol);
    for (const auto& f : frontier) {
        if (std::abs(f.normal.z()) > max_nz) continue;
        if (!octree.free_at_resolution(f.center, d0)) continue;
        if (f.center.x() < lo.x() || f.center.x() > hi.x() || f.center.y() < lo.y() ||
            f.center.y() > hi.y()) {
            continue;
        }
        if (path_tree) {
            // The unavoidable unseen pockets right under and beside the
            // traversed camera path satisfy both conditions but lead nowhere;
            // a cavity entrance proper sits beyond the stand-off band.
            const auto [j, dist] = path_tree->nearest(Vec3(f.center.x(), f.center.y(), 0.0));
            (void)j;
            if (dist < kTrajectoryExclusion) continue;
        }
        candidates.push_back(&f);
    }

    std::vector<Vec3> centers;
    centers.reserve(candidates.size());
    for (const auto* f : candidates) centers.push_back(f->center);
    const auto clusters =
        euclidean_cluster(centers, 3.0 * octree.resolution(), std::max(1, min_size));

    std::vector<CavityEntrance> entrances;
    for (const auto& cluster : clusters) {
        CavityEntrance e;
        Vec3 sum = Vec3::Zero();
        for (int idx : cluster) {
            const FrontierVoxel& f = *candidates[idx];
            e.voxel_keys.push_back(f.key);
            e.voxel_centers.push_back(f.center);
            sum += f.center;
        }
        e.centroid = sum / static_cast<double>(cluster.size());
        entrances.push_back(std::move(e));
    }
    return entrances;
}

bool segment_occluded(const OccupancyOctree& octree, const Vec3& from, const Vec3& to) {
    const double res = octree.resolution();
    const VoxelKey end = octree.key_for(to);
    VoxelKey k = octree.key_for(from);
    const Vec3 d = to - from;

    double t_max[3], t_delta[3];
    int step[3];
    const std::int32_t kc[3] = {k.x, k.y, k.z};
    for (int a = 0; a < 3; ++a) {
        if (d(a) > 1e-15) {
            step[a] = 1;
            t_max[a] = ((kc[a] + 1) * res - from(a)) / d(a);
            t_delta[a] = res / d(a);
        } else if (d(a) < -1e-15) {
            step[a] = -1;
            t_max[a] = (kc[a] * res - from(a)) / d(a);
            t_delta[a] = -res / d(a);
        } else {
            step[a] = 0;
            t_max[a] = t_delta[a] = std::numeric_limits<double>::infinity();
        }
    }
    const long cap =
        std::labs(end.x - k.x) + std::labs(end.y - k.y) + std::labs(end.z - k.z) + 3;
    long iter = 0;
    while (!(k == end) && iter++ < cap) {
        int axis = 0;
        if (t_max[1] < t_max[axis]) axis = 1;
        if (t_max[2] < t_max[axis]) axis = 2;
        if (axis == 0) k.x += step[0];
        else if (axis == 1) k.y += step[1];
        else k.z += step[2];
        t_max[axis] += t_delta[axis];
        if (k == end) break;
        if (octree.leaf_state(k) == VoxelState::Occupied) return true;
    }
    return false;
}

bool centroid_visible(const RobotPose& est_pose, const CameraModel& cam,
                      const OccupancyOctree& octree, const Vec3& centroid) {
    if (!in_frustum(est_pose, cam, centroid)) return false;
    return !segment_occluded(octree, est_pose.camera_center(cam), centroid);
}

bool assign_viewpoints(CavityEntrance& entrance, std::span<const Viewpoint> pe_history,
                       std::int64_t tau_f, const OccupancyOctree& octree,
                       const CameraModel& cam) {
    entrance.tau0 = entrance.tau1 = entrance.tau2 = -1;
    for (const Viewpoint& vp : pe_history) {
        if (vp.tick > tau_f) break;
        if (!centroid_visible(vp.estimated_pose, cam, octree, entrance.centroid)) continue;
        if (entrance.tau0 < 0) entrance.tau0 = vp.tick;
        entrance.tau1 = vp.tick;
    }
    if (entrance.tau0 < 0) return false;

    for (const Viewpoint& vp : pe_history) {
        if (vp.tick <= entrance.tau1 || vp.tick > tau_f) continue;
        bool contains_voxel = false;
        for (const Vec3& c : entrance.voxel_centers) {
            if (in_frustum(vp.estimated_pose, cam, c)) {
                contains_voxel = true;
                break;
            }
        }
        if (!contains_voxel) {
            entrance.tau2 = vp.tick;
            break;
        }
    }
    if (entrance.tau2 < 0) entrance.tau2 = tau_f;
    return entrance.tau1 < entrance.tau2;
}

std::optional<double> adapt_delta(const GoalSpec& spec, const LocalCostMap& map,
                                  const PotentialParams& params, double delta_min,
                                  double delta_step, double distance_cap) {
    std::vector<double> deltas;
    for (double d = delta_min; d < distance_cap - 1e-9; d += delta_step) deltas.push_back(d);
    deltas.push_back(distance_cap);
    if (deltas.size() < 2) return distance_cap;

    // The selection scan sums repulsion over the whole local map. Keeping the
    // path-following cutoff here would fabricate a minimum at the exact
    // distance where the far wall first enters the cutoff radius.
    PotentialParams scan = params;
    scan.repulse_radius = 2.0 * params.rho;

    const Vec3 offset_base = spec.p_bar + spec.step_len * spec.r;
    const auto blocked = [&](double d) {
        // A candidate whose approach segment crosses occupied cells would put
        // the camera behind the structure.
        for (double t = delta_min; t <= d + 1e-9; t += 0.5 * map.cell()) {
            const Vec2 sample = (offset_base - t * spec.n).head<2>();
            if (map.clearance(sample) < 0.7 * map.cell()) return true;
        }
        return false;
    };

    // Repulsion cost at each candidate goal (the attraction term vanishes at
    // the goal itself).
    constexpr double kBlocked = std::numeric_limits<double>::infinity();
    std::vector<double> cost(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const Vec2 g = spec.point_at(deltas[i]).head<2>();
        cost[i] = blocked(deltas[i]) ? kBlocked : potential_value(g, g, map, scan);
    }
    if (!std::any_of(cost.begin(), cost.end(), [](double c) { return std::isfinite(c); })) {
        return std::nullopt;
    }

    std::size_t chosen = deltas.size() - 1;
    bool found = false;
    for (std::size_t i = 1; i + 1 < deltas.size(); ++i) {
        if (cost[i] < cost[i - 1] && cost[i] < cost[i + 1]) {
            chosen = i;
            found = true;
            break;
        }
    }
    if (!found) {
        // No interior minimum: take the global one, ties toward the largest
        // delta (open space degenerates to the perimeter stand-off).
        double best = cost[0];
        chosen = 0;
        for (std::size_t i = 1; i < deltas.size(); ++i) {
            if (cost[i] <= best) {
                best = cost[i];
                chosen = i;
            }
        }
    }

    const Vec2 g = spec.point_at(deltas[chosen]).head<2>();
    if (map.clearance(g) < delta_min) return std::nullopt;  // narrower than 2*delta_min
    return deltas[chosen];
}

CeResult run_ce(const World& world, const Scenario& scenario, RunState& state,
                const PeResult& pe) {
    CeResult result;
    const PlannerParams& p = scenario.planner;

    result.entrances = detect_cavity_entrances(state.octree, p.d0, p.normal_tol,
                                               p.min_entrance_voxels, state.trajectory,
                                               p.distance);
    for (auto& e : result.entrances) {
        if (!assign_viewpoints(e, state.history, pe.tau_f, state.octree, world.camera)) {
            e.pruned = true;
            std::cerr << "structmap: dropping cavity entrance at (" << e.centroid.x() << ", "
                      << e.centroid.y() << "): no un-occluded start viewpoint\n";
        }
    }
    std::stable_sort(result.entrances.begin(), result.entrances.end(),
                     [](const CavityEntrance& a, const CavityEntrance& b) {
                         return a.tau0 < b.tau0;
                     });

    ExplorationEngine engine(world, scenario, state);
    ClosureParams closure;
    closure.max_distance = 0.5 * p.distance;

    result.completed = true;
    for (auto& entrance : result.entrances) {
        if (entrance.pruned) continue;

        const auto vp0 = std::find_if(state.history.begin(), state.history.end(),
                                      [&](const Viewpoint& vp) { return vp.tick == entrance.tau0; });
        if (vp0 == state.history.end()) {
            entrance.pruned = true;
            continue;
        }
        const Vec2 start_position = vp0->estimated_pose.position();
        const double face_yaw = std::atan2(entrance.centroid.y() - start_position.y(),
                                           entrance.centroid.x() - start_position.x());

        ExplorationEngine::PhaseConfig cfg;
        cfg.stand_off = p.distance;
        cfg.adapt_clearance = true;
        cfg.tick_limit = state.tick + p.cavity_tick_cap;
        cfg.on_capture = [&](const Viewpoint& vp) {
            for (auto& other : result.entrances) {
                if (&other == &entrance || other.pruned || other.explored) continue;
                if (centroid_visible(vp.estimated_pose, world.camera, state.octree,
                                     other.centroid)) {
                    other.pruned = true;
                }
            }
        };
        // Viewpoints shortly after tau2 sit right beside the entrance, so the
        // closure check only arms once the robot has actually reached the
        // cavity mouth; before that a match just means "still standing at the
        // start viewpoint".
        bool reached_mouth = false;
        cfg.should_stop = [&, reached_mouth](const Viewpoint& vp) mutable {
            const Vec2 to_centroid =
                vp.estimated_pose.position() - entrance.centroid.head<2>();
            // Wandered far off this cavity: give up rather than roam.
            if (to_centroid.norm() > 2.0 * world.camera.range) return true;
            reached_mouth = reached_mouth || to_centroid.norm() < 1.5;
            if (!reached_mouth) return false;
            const auto match = detect_loop_closure(
                vp, state.history, state.octree, world.camera, closure,
                std::make_pair(entrance.tau2, pe.tau_f));
            if (match) engine.mark_event("closure");
            return match.has_value();
        };

        if (!engine.navigate_to(start_position, face_yaw, state.tick + p.cavity_tick_cap,
                                static_cast<std::size_t>(pe.tau_f) + 1)) {
            result.status += entrance.explored ? "" : "transit_timeout;";
            continue;
        }

        // Step through the mouth, then face the wall on the right of the
        // entry direction: inside the cavity the clockwise convention tracks
        // that wall, so the first goal leads deeper in rather than back out.
        const Vec2 entry_dir =
            (entrance.centroid.head<2>() - engine.state().est_position()).normalized();
        const double entry_yaw = std::atan2(entry_dir.y(), entry_dir.x());
        engine.navigate_to(entrance.centroid.head<2>(), wrap_angle(entry_yaw - M_PI_2),
                           state.tick + p.cavity_tick_cap, 0, &cfg, p.delta_min);

        entrance.explored = true;
        ++result.explored_count;
        const auto outcome = engine.run_phase(cfg);
        entrance.delta_used = engine.last_delta();
        if (outcome == ExplorationEngine::PhaseOutcome::TickCap) result.status += "cavity_timeout;";
        if (outcome == ExplorationEngine::PhaseOutcome::Abandoned) result.status += "abandoned;";
    }
    if (result.status.empty()) result.status = "completed";
    return result;
}

}  // namespace structmap
