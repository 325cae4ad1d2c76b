#pragma once

#include "structmap/geometry/types.hpp"

#include <span>

namespace structmap {

/// Euclidean clustering: two points share a cluster iff they are connected by
/// a chain of points with consecutive distances <= tol. Clusters smaller than
/// min_size are discarded. Output clusters are ordered by their smallest
/// member index and members are ascending, so results are deterministic.
std::vector<std::vector<int>> euclidean_cluster(std::span<const Vec3> points, double tol,
                                                int min_size);

}  // namespace structmap
