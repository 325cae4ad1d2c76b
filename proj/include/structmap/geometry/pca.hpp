#pragma once

#include "structmap/geometry/types.hpp"

#include <span>

namespace structmap {

/// Fits a plane to the points by PCA of the covariance
/// X = (1/m) sum (p_i - mean)(p_i - mean)^T.
///
/// axes are the eigenvectors of X ordered by decreasing eigenvalue, each
/// re-signed so its largest-magnitude component is positive (callers that
/// need a particular orientation re-sign the normal themselves).
///
/// Throws DegenerateCloud for fewer than 3 points or a collinear set
/// (rank(X) < 2).
PlaneFit pca_plane_fit(std::span<const Vec3> points);
PlaneFit pca_plane_fit(const PointCloud& cloud);

}  // namespace structmap
