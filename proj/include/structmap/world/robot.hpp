#pragma once

#include "structmap/world/camera.hpp"

#include <random>

namespace structmap {

struct MotionCommand {
    double v = 0.0;      // forward velocity (m/s)
    double omega = 0.0;  // yaw rate (rad/s)
};

/// Wheel-encoder noise: independent zero-mean Gaussian noise on each wheel
/// speed with variance k*(v_x + omega_z)/2.
struct OdometryNoiseModel {
    double k = 0.0;
    double wheel_base = 0.555;

    double encoder_variance(double v, double omega) const {
        return std::max(0.0, k * (v + omega) * 0.5);
    }

    /// Left/right wheel speeds for the command, with encoder noise applied.
    std::pair<double, double> noisy_wheel_speeds(double v, double omega,
                                                 std::mt19937_64& rng) const {
        const double half = omega * wheel_base * 0.5;
        double left = v - half;
        double right = v + half;
        if (k > 0.0) {
            const double sigma = std::sqrt(encoder_variance(v, omega));
            std::normal_distribution<double> noise(0.0, sigma);
            left += noise(rng);
            right += noise(rng);
        }
        return {left, right};
    }
};

/// Exact unicycle integration over one step.
RobotPose integrate_unicycle(const RobotPose& pose, double v, double omega, double dt);

/// Advances the ground-truth pose with the exact kinematics and the estimated
/// pose from noisy wheel-encoder readings. With k = 0 the two stay identical.
void step_robot(RobotPose& true_pose, RobotPose& estimated_pose, const MotionCommand& cmd,
                double dt, const OdometryNoiseModel& noise, std::mt19937_64& rng);

}  // namespace structmap
