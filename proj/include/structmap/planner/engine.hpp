#pragma once

#include "structmap/occupancy/octree.hpp"
#include "structmap/planner/goal.hpp"
#include "structmap/planner/loop.hpp"
#include "structmap/planner/potential.hpp"
#include "structmap/world/scenario.hpp"
#include "structmap/world/sensors.hpp"
#include "structmap/world/viewpoint.hpp"

#include <deque>
#include <functional>
#include <optional>
#include <random>

namespace structmap {

struct TrajectoryRow {
    std::int64_t tick = 0;
    RobotPose true_pose;
    RobotPose est_pose;
    std::string event;  // goal, rescan, closure or empty
};

/// Mutable per-run simulation state shared by both exploration phases: pose
/// channels, tick clock, trajectory log, capture history and the map being
/// built. The map and the global cloud are registered with estimated poses;
/// physics runs on the true ones.
struct RunState {
    RobotPose true_pose;
    RobotPose est_pose;
    std::int64_t tick = 0;
    std::vector<TrajectoryRow> trajectory;
    std::vector<Viewpoint> history;
    PointCloud global_cloud{FrameTag::Global};
    OccupancyOctree octree;
    std::deque<PointCloud> recent_clouds;  // global frame, newest last
    std::mt19937_64 rng;
    int rescan_count = 0;

    RunState(const Scenario& scenario, const RobotPose& start);

    Vec2 est_position() const { return est_pose.position(); }
};

/// Camera yaw that looks along n.
inline double yaw_of(const Vec3& n) { return std::atan2(n.y(), n.x()); }

/// Nearest occupied cost-map cell within radius of the robot, as the camera
/// yaw that faces it. nullopt when the map shows nothing that close.
std::optional<double> rescan_ahead_yaw(const RobotPose& est_pose, const LocalCostMap& map,
                                       double radius);

/// Drives capture / next-goal / local-path cycles over the shared RunState.
/// The perimeter and cavity phases differ only in their PhaseConfig.
class ExplorationEngine {
public:
    enum class PhaseOutcome { Terminated, TickCap, Abandoned };

    struct PhaseConfig {
        double stand_off = 3.0;        // desired structure distance D
        bool adapt_clearance = false;  // cavity mode: search delta <= D
        std::int64_t tick_limit = 50000;
        LoopMonitor* monitor = nullptr;
        std::function<void(const Viewpoint&)> on_capture;
        std::function<bool(const Viewpoint&)> should_stop;
    };

    ExplorationEngine(const World& world, const Scenario& scenario, RunState& state);

    RunState& state() { return st_; }
    const Viewpoint& capture(const std::string& event);
    void mark_event(const std::string& event);

    PhaseOutcome run_phase(const PhaseConfig& cfg);

    /// Point-to-point navigation over a cost map built from the whole octree.
    /// The potential field is a local method, so when its path stalls (for
    /// instance with the structure between here and the target) the engine
    /// retraces the first retrace_rows of the recorded trajectory instead,
    /// which is known free space. Returns false when the target stays
    /// unreachable within the tick limit.
    bool navigate_to(const Vec2& target, double target_cam_yaw, std::int64_t tick_limit,
                     std::size_t retrace_rows = 0,
                     const PhaseConfig* capture_hooks = nullptr,
                     double repulse_radius = -1.0);  // default: the stand-off D

    /// Smallest clearance adapt_delta settled on during the last phase.
    double last_delta() const { return last_delta_; }
    LocalCostMap costmap_from_recent() const;
    LocalCostMap costmap_from_octree(const Vec2& center, double half_extent) const;

private:
    enum class FollowOutcome { Arrived, Obstacle, Stop, TickCap, Blocked };

    PotentialParams potential_params(double clearance) const;
    GoalSpec to_global(const CameraGoal& goal_camera, const RobotPose& est_pose,
                       double stand_off) const;
    void record_row();
    void step_towards(const Vec2& waypoint, double desired_cam_yaw, const PhaseConfig* cfg);
    void tick_in_place(double desired_cam_yaw, const PhaseConfig* cfg);
    bool slew_camera_to(double target_yaw, const PhaseConfig* cfg, std::int64_t tick_limit);
    FollowOutcome follow(const std::vector<Vec2>& polyline, double desired_cam_yaw,
                         const PhaseConfig& cfg, double trigger_radius);
    bool rescan(const LocalCostMap& map, const PhaseConfig& cfg,
                std::optional<double> fallback_yaw);

    const World& world_;
    const Scenario& scn_;
    RunState& st_;
    int pending_capture_ = -1;  // index into history awaiting goal recomputation
    std::optional<GoalSpec> last_spec_;
    std::optional<GoalSpec> band_spec_;  // last goal actually followed un-vetoed
    double dist_since_rescan_ = 1e9;
    double last_delta_ = 0.0;
};

}  // namespace structmap
