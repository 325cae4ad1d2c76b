#include "structmap/world/robot.hpp"

namespace structmap {

RobotPose integrate_unicycle(const RobotPose& pose, double v, double omega, double dt) {
    RobotPose out = pose;
    if (std::abs(omega) < 1e-12) {
        out.x += v * std::cos(pose.yaw_robot) * dt;
        out.y += v * std::sin(pose.yaw_robot) * dt;
    } else {
        const double yaw1 = pose.yaw_robot + omega * dt;
        const double r = v / omega;
        out.x += r * (std::sin(yaw1) - std::sin(pose.yaw_robot));
        out.y -= r * (std::cos(yaw1) - std::cos(pose.yaw_robot));
        out.yaw_robot = wrap_angle(yaw1);
        return out;
    }
    out.yaw_robot = wrap_angle(pose.yaw_robot + omega * dt);
    return out;
}

void step_robot(RobotPose& true_pose, RobotPose& estimated_pose, const MotionCommand& cmd,
                double dt, const OdometryNoiseModel& noise, std::mt19937_64& rng) {
    if (dt <= 0.0) throw Error("step_robot: dt must be positive");

    true_pose = integrate_unicycle(true_pose, cmd.v, cmd.omega, dt);

    if (noise.k <= 0.0) {
        estimated_pose = integrate_unicycle(estimated_pose, cmd.v, cmd.omega, dt);
        return;
    }
    const auto [left, right] = noise.noisy_wheel_speeds(cmd.v, cmd.omega, rng);
    const double v_meas = 0.5 * (left + right);
    const double omega_meas = (right - left) / noise.wheel_base;
    estimated_pose = integrate_unicycle(estimated_pose, v_meas, omega_meas, dt);
}

}  // namespace structmap
