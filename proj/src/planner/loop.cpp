#include "structmap/planner/loop.hpp"

#include <algorithm>

namespace structmap {

LoopMonitor::LoopMonitor(const Vec2& reference, const Vec2& start)
    : reference_(reference), start_(start) {
    prev_angle_ = std::atan2(start.y() - reference.y(), start.x() - reference.x());
    initialized_ = true;
}

void LoopMonitor::update(const Vec2& position) {
    if (!initialized_) {
        prev_angle_ = std::atan2(position.y() - reference_.y(), position.x() - reference_.x());
        initialized_ = true;
        return;
    }
    const double angle =
        std::atan2(position.y() - reference_.y(), position.x() - reference_.x());
    theta_ += wrap_angle(angle - prev_angle_);
    prev_angle_ = angle;
    if (theta_ <= -2.0 * M_PI) lap_done_ = true;
}

std::set<std::uint64_t> visible_occupied_cells(const RobotPose& pose, const CameraModel& cam,
                                               const OccupancyOctree& octree) {
    const Vec3 c = pose.camera_center(cam);
    const double res = octree.resolution();
    const VoxelKey lo = octree.key_for(c - Vec3::Constant(cam.range));
    const VoxelKey hi = octree.key_for(c + Vec3::Constant(cam.range));
    std::vector<VoxelKey> keys;
    octree.occupied_leaves_in_box(lo, hi, keys);

    std::set<std::uint64_t> cells;
    for (const VoxelKey& k : keys) {
        const Vec3 p((k.x + 0.5) * res, (k.y + 0.5) * res, (k.z + 0.5) * res);
        if (in_frustum(pose, cam, p)) cells.insert(morton_code(k));
    }
    return cells;
}

std::optional<std::int64_t> detect_loop_closure(
    const Viewpoint& current, std::span<const Viewpoint> history, const OccupancyOctree& octree,
    const CameraModel& cam, const ClosureParams& params,
    std::optional<std::pair<std::int64_t, std::int64_t>> window) {
    std::set<std::uint64_t> current_cells;
    bool have_current = false;

    for (const Viewpoint& vp : history) {
        if (window) {
            if (vp.tick <= window->first || vp.tick >= window->second) continue;
        }
        if (current.tick - vp.tick < params.min_gap_ticks) continue;

        const double dist =
            (vp.true_pose.position() - current.true_pose.position()).norm();
        if (dist >= params.max_distance) continue;
        const double dyaw =
            wrap_angle(vp.true_pose.yaw_camera - current.true_pose.yaw_camera);
        if (std::abs(dyaw) >= params.max_yaw) continue;

        if (!have_current) {
            current_cells = visible_occupied_cells(current.true_pose, cam, octree);
            have_current = true;
            if (current_cells.empty()) return std::nullopt;
        }
        const auto vp_cells = visible_occupied_cells(vp.true_pose, cam, octree);
        std::size_t shared = 0;
        for (const auto& cell : current_cells) shared += vp_cells.count(cell);
        if (static_cast<double>(shared) >=
            params.min_overlap * static_cast<double>(current_cells.size())) {
            return vp.tick;
        }
    }
    return std::nullopt;
}

}  // namespace structmap
