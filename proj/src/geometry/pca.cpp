#include "structmap/geometry/pca.hpp"

#include <Eigen/Eigenvalues>

namespace structmap {

PlaneFit pca_plane_fit(std::span<const Vec3> points) {
    const std::size_t m = points.size();
    if (m < 3) {
        throw DegenerateCloud("pca_plane_fit: needs at least 3 points, got " +
                              std::to_string(m));
    }

    Vec3 mean = Vec3::Zero();
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(m);

    Mat3 cov = Mat3::Zero();
    for (const auto& p : points) {
        const Vec3 d = p - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(m);

    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw DegenerateCloud("pca_plane_fit: eigen decomposition failed");
    }

    // Eigen sorts ascending; we want descending.
    PlaneFit fit;
    fit.centroid = mean;
    for (int i = 0; i < 3; ++i) {
        fit.lambdas[i] = std::max(0.0, solver.eigenvalues()(2 - i));
        Vec3 v = solver.eigenvectors().col(2 - i);
        int k = 0;
        v.cwiseAbs().maxCoeff(&k);
        if (v(k) < 0.0) v = -v;
        fit.axes[i] = v;
    }

    // Collinear (or fully degenerate) sets leave the plane normal unconstrained.
    const double scale = std::max(fit.lambdas[0], 1.0);
    if (fit.lambdas[1] <= 1e-12 * scale) {
        throw DegenerateCloud("pca_plane_fit: points are collinear (rank(X) < 2)");
    }
    return fit;
}

PlaneFit pca_plane_fit(const PointCloud& cloud) {
    return pca_plane_fit(std::span<const Vec3>(cloud.points));
}

}  // namespace structmap
