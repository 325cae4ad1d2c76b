#pragma once

#include "structmap/geometry/types.hpp"
#include "structmap/world/camera.hpp"

#include <cstdint>

namespace structmap {

/// One capture event: simulation tick, both pose channels and the cloud as
/// seen by the camera. Timestamps are strictly increasing within a run.
struct Viewpoint {
    std::int64_t tick = 0;
    RobotPose true_pose;
    RobotPose estimated_pose;
    PointCloud cloud_camera{FrameTag::Camera};
};

}  // namespace structmap
