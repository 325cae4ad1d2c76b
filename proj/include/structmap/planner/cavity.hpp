#pragma once

#include "structmap/occupancy/frontier.hpp"
#include "structmap/planner/engine.hpp"
#include "structmap/planner/perimeter.hpp"

namespace structmap {

/// Cluster of cavity-entrance voxels with the perimeter-phase viewpoints that
/// frame its exploration: tau0 first sees the entrance, tau1 last sees it,
/// tau2 is the first later viewpoint that no longer contains it.
struct CavityEntrance {
    std::vector<VoxelKey> voxel_keys;
    std::vector<Vec3> voxel_centers;
    Vec3 centroid = Vec3::Zero();
    std::int64_t tau0 = -1, tau1 = -1, tau2 = -1;
    bool explored = false;
    bool pruned = false;
    double delta_used = 0.0;
};

/// Filters the frontier down to cavity entrances: near-horizontal normals
/// (removes view-frustum top/bottom sheets), at least d0 of clearance from
/// occupied space, Euclidean-clustered with sparse clusters dropped. Two
/// further scoping filters remove explored-boundary artifacts: voxels hugging
/// the traversed path (the unseen shell right around the camera tube) and
/// voxels outside the mapped structure's horizontal extent plus a margin
/// (range-limit boundaries in the open field).
std::vector<CavityEntrance> detect_cavity_entrances(
    const OccupancyOctree& octree, double d0, double normal_tol, int min_size,
    std::span<const TrajectoryRow> trajectory = {}, double structure_margin = 3.0);

/// Straight-line occlusion test against occupied leaves.
bool segment_occluded(const OccupancyOctree& octree, const Vec3& from, const Vec3& to);

/// Frustum + occlusion visibility of an entrance centroid.
bool centroid_visible(const RobotPose& est_pose, const CameraModel& cam,
                      const OccupancyOctree& octree, const Vec3& centroid);

/// Picks tau0/tau1/tau2 from the perimeter history. False when no viewpoint
/// sees the centroid un-occluded (the entrance is dropped).
bool assign_viewpoints(CavityEntrance& entrance, std::span<const Viewpoint> pe_history,
                       std::int64_t tau_f, const OccupancyOctree& octree,
                       const CameraModel& cam);

/// Clearance adaptation inside confined spaces: evaluates the repulsion cost
/// of candidate goals point_at(delta) on a grid from delta_min up to the
/// perimeter stand-off and returns the first local minimum (the stand-off
/// itself in open space). nullopt when even the best candidate sits within
/// delta_min of the structure.
std::optional<double> adapt_delta(const GoalSpec& spec, const LocalCostMap& map,
                                  const PotentialParams& params, double delta_min,
                                  double delta_step, double distance_cap);

struct CeResult {
    bool completed = false;
    std::string status;
    std::vector<CavityEntrance> entrances;
    int explored_count = 0;
};

/// Cavity exploration: visit each detected entrance in tau0 order, explore it
/// with the perimeter policy at the adapted clearance, prune entrances whose
/// centroids come into view, and finish each cavity on a loop closure against
/// a viewpoint between its tau2 and the end of the perimeter phase.
CeResult run_ce(const World& world, const Scenario& scenario, RunState& state,
                const PeResult& pe);

}  // namespace structmap
