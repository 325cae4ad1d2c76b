#pragma once

#include "structmap/world/camera.hpp"
#include "structmap/world/robot.hpp"
#include "structmap/world/structure.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace structmap {

/// Planner knobs shared by both exploration phases.
struct PlannerParams {
    double distance = 3.0;        // desired camera-to-structure distance D
    double d0 = 0.4;              // cavity-entrance clearance threshold
    double alpha = 1.0;           // goal attraction gain
    double beta = 0.05;           // repulsion scale (small => repulsion dominates)
    double delta_min = 0.5;       // smallest cavity clearance considered
    double delta_step = 0.25;     // clearance search grid step
    double cell = 0.1;            // cost-map cell size, also the descent step
    double leaf = 0.05;           // occupancy leaf resolution
    double normal_tol = 15.0 * M_PI / 180.0;  // entrance-normal horizontality
    int min_entrance_voxels = 20;
    double ground_eps = 0.05;     // points below this height count as ground

    double dt = 0.1;              // simulation tick
    double v_max = 1.0;
    double omega_max = 1.8;
    double camera_slew = 2.0;     // rad/s camera yaw rate
    int capture_period = 5;       // ticks between map captures while driving
    std::int64_t tick_cap = 50000;
    std::int64_t cavity_tick_cap = 2500;
};

struct StartPose {
    double x = 0.0;
    double y = 0.0;
    double yaw_camera = 0.0;

    /// Robot heading with the structure kept on the camera side while
    /// circling clockwise: heading = camera yaw + 90 degrees.
    RobotPose robot_pose() const {
        RobotPose p;
        p.x = x;
        p.y = y;
        p.yaw_camera = yaw_camera;
        p.yaw_robot = wrap_angle(yaw_camera + M_PI_2);
        return p;
    }
};

struct Scenario {
    std::string name = "scenario";
    double perimeter = 0.0;  // declared footprint outline length
    std::vector<Wall> walls;
    StartPose start;
    CameraModel camera;
    double noise_k = 0.0;
    std::uint64_t seed = 1;
    PlannerParams planner;
    std::optional<std::vector<Vec2>> fbe_polygon;

    /// Bounding polygon for the FBE baseline; defaults to the structure's
    /// bounding box inflated by 2*D.
    std::vector<Vec2> fbe_polygon_or_default(const StructureModel& structure) const;
};

Scenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Scenario& scenario);

struct ScenarioViolation {
    std::string code;  // IC1, IC2, A2
    std::string message;
};

/// Start-configuration checks: a separating vertical plane must exist between
/// the robot and the structure (IC1), the structure must intersect the
/// initial view frustum (IC2), and disconnected wall groups must keep a
/// 2*range clearance from each other (A2).
std::vector<ScenarioViolation> validate_scenario(const StructureModel& structure,
                                                 const RobotPose& start,
                                                 const CameraModel& camera);

/// Bundled immutable world services for one run.
struct World {
    StructureModel structure;
    CameraModel camera;
    OdometryNoiseModel noise;

    static World from_scenario(const Scenario& s) {
        World w;
        w.structure = StructureModel(s.walls);
        w.camera = s.camera;
        w.noise.k = s.noise_k;
        return w;
    }
};

}  // namespace structmap
