#pragma once

#include "structmap/world/camera.hpp"
#include "structmap/world/structure.hpp"

#include <optional>

namespace structmap {

/// Renders one depth image as a point cloud in the camera frame. One ray per
/// (row, col) spread across the psi x phi angular grid; row 0 is the top of
/// the image and output order is row-major. Only rays that hit something
/// within range contribute points.
PointCloud render_depth(const RobotPose& pose, const CameraModel& cam,
                        const StructureModel& structure);

struct ObstacleHit {
    Vec3 point;       // global frame
    double distance;  // from the robot center
    double bearing;   // relative to robot heading, (-pi/2, pi/2)
};

/// Forward obstacle detector: a dense planar ray fan spanning the 180-degree
/// half-disc ahead of the robot. Returns the nearest structure hit within
/// radius, or nullopt.
std::optional<ObstacleHit> detect_obstacle_ahead(const RobotPose& pose, double radius,
                                                 const StructureModel& structure,
                                                 int n_rays = 181,
                                                 double sensor_height = 0.3);

}  // namespace structmap
