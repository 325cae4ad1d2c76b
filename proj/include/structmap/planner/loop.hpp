#pragma once

#include "structmap/occupancy/octree.hpp"
#include "structmap/world/viewpoint.hpp"

#include <optional>
#include <set>
#include <span>

namespace structmap {

/// Tracks the signed angle swept by the robot around a fixed reference point
/// inside the structure. Increments are wrapped into (-pi, pi]; one full
/// clockwise lap drives theta down to -2*pi.
class LoopMonitor {
public:
    LoopMonitor() = default;
    LoopMonitor(const Vec2& reference, const Vec2& start);

    void update(const Vec2& position);
    double theta() const { return theta_; }
    bool lap_done() const { return lap_done_; }
    const Vec2& reference() const { return reference_; }

private:
    Vec2 reference_ = Vec2::Zero();
    Vec2 start_ = Vec2::Zero();
    double prev_angle_ = 0.0;
    double theta_ = 0.0;
    bool lap_done_ = false;
    bool initialized_ = false;
};

struct ClosureParams {
    double max_distance = 1.5;            // 0.5 * D
    double max_yaw = 30.0 * M_PI / 180.0;
    double min_overlap = 0.3;             // shared fraction of viewed cells
    std::int64_t min_gap_ticks = 200;     // ignore very recent viewpoints
};

/// Occupied leaf voxels inside the pose's view frustum; the geometric
/// stand-in for "what this view shows of the structure".
std::set<std::uint64_t> visible_occupied_cells(const RobotPose& pose, const CameraModel& cam,
                                               const OccupancyOctree& octree);

/// Geometric loop-closure surrogate: earliest viewpoint in history whose true
/// pose is within max_distance and max_yaw of the current one and whose
/// frustum shares at least min_overlap of the currently viewed structure
/// cells. window (when set) restricts candidate timestamps to (lo, hi).
std::optional<std::int64_t> detect_loop_closure(
    const Viewpoint& current, std::span<const Viewpoint> history, const OccupancyOctree& octree,
    const CameraModel& cam, const ClosureParams& params,
    std::optional<std::pair<std::int64_t, std::int64_t>> window = std::nullopt);

}  // namespace structmap
