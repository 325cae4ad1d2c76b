#pragma once

#include "structmap/geometry/types.hpp"

namespace structmap {

/// Depth camera intrinsics. The camera sits at a fixed height above the robot
/// center with level pitch and roll; only its yaw moves.
struct CameraModel {
    double range = 4.5;          // max sensing distance (meters)
    double psi = 45.0 * M_PI / 180.0;   // vertical angle of view
    double phi = 58.0 * M_PI / 180.0;   // horizontal angle of view
    double height = 0.8;         // camera center height above ground
    int rows = 48;
    int cols = 64;

    /// Tallest structure height that can appear in any depth image.
    double h_max() const { return height + range * std::tan(psi * 0.5); }
};

/// SE(2) robot state plus the camera's independent yaw (both in the global
/// frame). The camera center sits directly above the robot center.
struct RobotPose {
    double x = 0.0;
    double y = 0.0;
    double yaw_robot = 0.0;
    double yaw_camera = 0.0;

    Vec2 position() const { return Vec2(x, y); }
    Vec3 camera_center(const CameraModel& cam) const { return Vec3(x, y, cam.height); }
};

/// Columns are the camera axes in the global frame: x forward along the
/// optical axis, y left, z up (shared with the global z by the level-ground
/// assumption).
inline Mat3 camera_rotation(double yaw_camera) { return yaw_rotation(yaw_camera); }

inline Vec3 camera_to_global(const RobotPose& pose, const CameraModel& cam, const Vec3& p_c) {
    return camera_rotation(pose.yaw_camera) * p_c + pose.camera_center(cam);
}

inline Vec3 global_to_camera(const RobotPose& pose, const CameraModel& cam, const Vec3& p_g) {
    return camera_rotation(pose.yaw_camera).transpose() * (p_g - pose.camera_center(cam));
}

inline PointCloud cloud_to_global(const RobotPose& pose, const CameraModel& cam,
                                  const PointCloud& cloud_camera) {
    cloud_camera.require_frame(FrameTag::Camera, "cloud_to_global");
    PointCloud out(FrameTag::Global);
    out.points.reserve(cloud_camera.size());
    const Mat3 r = camera_rotation(pose.yaw_camera);
    const Vec3 c = pose.camera_center(cam);
    for (const auto& p : cloud_camera.points) out.points.push_back(r * p + c);
    return out;
}

/// True when a global point lies inside the camera frustum (range and both
/// angular extents).
inline bool in_frustum(const RobotPose& pose, const CameraModel& cam, const Vec3& p_g) {
    const Vec3 p_c = global_to_camera(pose, cam, p_g);
    const double d = p_c.norm();
    if (d > cam.range || d < 1e-9) return false;
    const double horiz = std::hypot(p_c.x(), p_c.y());
    if (std::abs(std::atan2(p_c.y(), p_c.x())) > cam.phi * 0.5) return false;
    if (std::abs(std::atan2(p_c.z(), horiz)) > cam.psi * 0.5) return false;
    return p_c.x() > 0.0;
}

}  // namespace structmap
