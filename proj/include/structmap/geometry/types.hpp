#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace structmap {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

/// Frame of reference a cloud or pose is expressed in.
enum class FrameTag { Global, Robot, Camera };

inline const char* frame_name(FrameTag f) {
    switch (f) {
        case FrameTag::Global: return "global";
        case FrameTag::Robot: return "robot";
        case FrameTag::Camera: return "camera";
    }
    return "?";
}

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateCloud : Error {
    using Error::Error;
};
struct EmptyTarget : Error {
    using Error::Error;
};
struct FrameMismatch : Error {
    using Error::Error;
};
struct OutOfDomain : Error {
    using Error::Error;
};

/// Ordered set of 3D points tagged with the frame they live in.
/// Order is preserved so downstream iteration is deterministic.
struct PointCloud {
    std::vector<Vec3> points;
    FrameTag frame = FrameTag::Global;

    PointCloud() = default;
    explicit PointCloud(FrameTag f) : frame(f) {}
    PointCloud(std::vector<Vec3> pts, FrameTag f) : points(std::move(pts)), frame(f) {}

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    void push_back(const Vec3& p) { points.push_back(p); }

    Vec3 centroid() const {
        Vec3 c = Vec3::Zero();
        for (const auto& p : points) c += p;
        return points.empty() ? c : Vec3(c / static_cast<double>(points.size()));
    }

    void require_frame(FrameTag expected, const char* op) const {
        if (frame != expected) {
            throw FrameMismatch(std::string(op) + ": cloud is in " + frame_name(frame) +
                                " frame, expected " + frame_name(expected));
        }
    }
};

/// Proper rigid motion (rotation + translation), det(R) = +1.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    PointCloud apply(const PointCloud& cloud) const {
        PointCloud out(cloud.frame);
        out.points.reserve(cloud.size());
        for (const auto& p : cloud.points) out.points.push_back(apply(p));
        return out;
    }

    // this after other: (this*other)(p) == this(other(p))
    RigidTransform compose(const RigidTransform& other) const {
        RigidTransform out;
        out.rotation = rotation * other.rotation;
        out.translation = rotation * other.translation + translation;
        return out;
    }

    RigidTransform inverse() const {
        RigidTransform out;
        out.rotation = rotation.transpose();
        out.translation = -(out.rotation * translation);
        return out;
    }
};

/// Plane fit from PCA: centroid, orthonormal axes and eigenvalues sorted by
/// decreasing eigenvalue. axes[2] is the plane normal (smallest spread).
struct PlaneFit {
    Vec3 centroid = Vec3::Zero();
    std::array<Vec3, 3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    std::array<double, 3> lambdas{0.0, 0.0, 0.0};

    const Vec3& normal() const { return axes[2]; }
};

inline double wrap_angle(double a) {
    // into (-pi, pi]
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

inline Mat3 yaw_rotation(double yaw) {
    Mat3 r;
    const double c = std::cos(yaw), s = std::sin(yaw);
    r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return r;
}

}  // namespace structmap
