#include "structmap/geometry/icp.hpp"

#include "structmap/geometry/kdtree.hpp"

#include <Eigen/SVD>

namespace structmap {

RigidTransform rigid_fit(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                         bool* degenerate) {
    if (source.size() != target.size() || source.size() < 3) {
        throw DegenerateCloud("rigid_fit: needs >= 3 paired points");
    }
    const double n = static_cast<double>(source.size());
    Vec3 sc = Vec3::Zero(), tc = Vec3::Zero();
    for (std::size_t i = 0; i < source.size(); ++i) {
        sc += source[i];
        tc += target[i];
    }
    sc /= n;
    tc /= n;

    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < source.size(); ++i) {
        h += (source[i] - sc) * (target[i] - tc).transpose();
    }

    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    Mat3 v = svd.matrixV();
    Mat3 r = v * u.transpose();
    if (r.determinant() < 0.0) {
        v.col(2) *= -1.0;
        r = v * u.transpose();
    }

    if (degenerate) {
        // Collinear pairings leave at most one well-determined singular value.
        const auto& sv = svd.singularValues();
        const double scale = std::max(sv(0), 1e-300);
        *degenerate = (sv(1) <= 1e-9 * scale);
    }

    RigidTransform out;
    out.rotation = r;
    out.translation = tc - r * sc;
    return out;
}

IcpResult icp_register(const PointCloud& source, const PointCloud& target, int max_iters,
                       double convergence_tol) {
    if (source.frame != target.frame) {
        throw FrameMismatch("icp_register: source and target must share a frame");
    }
    if (source.size() < 3 || target.size() < 3) {
        throw DegenerateCloud("icp_register: both clouds need >= 3 points");
    }

    KdTree tree(target.points);
    IcpResult result;
    std::vector<Vec3> moved = source.points;
    std::vector<Vec3> matched(source.size());
    double prev_mean = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iters; ++iter) {
        double mean = 0.0;
        for (std::size_t i = 0; i < moved.size(); ++i) {
            auto [idx, dist] = tree.nearest(moved[i]);
            matched[i] = target.points[idx];
            mean += dist;
        }
        mean /= static_cast<double>(moved.size());
        result.iterations = iter + 1;
        result.mean_distance = mean;

        if (std::abs(prev_mean - mean) < convergence_tol) {
            result.converged = true;
            break;
        }
        prev_mean = mean;

        bool degenerate = false;
        const RigidTransform delta = rigid_fit(moved, matched, &degenerate);
        if (degenerate) {
            result.degenerate = true;
            break;
        }
        result.transform = delta.compose(result.transform);
        for (auto& p : moved) p = delta.apply(p);
    }
    return result;
}

}  // namespace structmap
