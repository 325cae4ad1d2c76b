#include "structmap/world/sensors.hpp"

namespace structmap {

PointCloud render_depth(const RobotPose& pose, const CameraModel& cam,
                        const StructureModel& structure) {
    PointCloud cloud(FrameTag::Camera);
    const Mat3 r = camera_rotation(pose.yaw_camera);
    const Vec3 origin = pose.camera_center(cam);

    for (int i = 0; i < cam.rows; ++i) {
        const double el = cam.rows > 1
                              ? cam.psi * 0.5 - cam.psi * i / (cam.rows - 1)
                              : 0.0;
        const double ce = std::cos(el), se = std::sin(el);
        for (int j = 0; j < cam.cols; ++j) {
            const double az = cam.cols > 1
                                  ? -cam.phi * 0.5 + cam.phi * j / (cam.cols - 1)
                                  : 0.0;
            const Vec3 dir_c(ce * std::cos(az), ce * std::sin(az), se);
            const Vec3 dir_g = r * dir_c;
            if (auto hit = structure.ray_cast(origin, dir_g, cam.range)) {
                cloud.points.push_back(r.transpose() * (*hit - origin));
            }
        }
    }
    return cloud;
}

std::optional<ObstacleHit> detect_obstacle_ahead(const RobotPose& pose, double radius,
                                                 const StructureModel& structure, int n_rays,
                                                 double sensor_height) {
    const Vec3 origin(pose.x, pose.y, sensor_height);
    std::optional<ObstacleHit> best;
    for (int i = 0; i < n_rays; ++i) {
        const double bearing = -M_PI_2 + M_PI * i / (n_rays - 1);
        const double yaw = pose.yaw_robot + bearing;
        const Vec3 dir(std::cos(yaw), std::sin(yaw), 0.0);
        const auto hit = structure.ray_cast(origin, dir, radius, /*include_ground=*/false);
        if (!hit) continue;
        const double d = (Vec2(hit->x(), hit->y()) - pose.position()).norm();
        if (!best || d < best->distance) best = ObstacleHit{*hit, d, bearing};
    }
    return best;
}

}  // namespace structmap
