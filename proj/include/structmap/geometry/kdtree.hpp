#pragma once

#include "structmap/geometry/types.hpp"

#include <utility>

namespace structmap {

/// Exact k-d tree over a fixed set of 3D points. Built once, queried many
/// times. Ties in distance are broken by lowest point index so results are
/// bit-comparable with a linear scan.
class KdTree {
public:
    KdTree() = default;
    explicit KdTree(std::vector<Vec3> points);

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    const std::vector<Vec3>& points() const { return points_; }

    /// Index and Euclidean distance of the nearest point. Throws EmptyTarget
    /// on an empty tree.
    std::pair<int, double> nearest(const Vec3& query) const;

    /// Indices of all points within radius (inclusive), sorted ascending.
    std::vector<int> radius_search(const Vec3& query, double radius) const;

private:
    struct Node {
        int index = -1;   // point stored at this node
        int axis = 0;
        int left = -1;
        int right = -1;
    };

    int build(int begin, int end, std::vector<int>& scratch);
    void nearest_rec(int node, const Vec3& q, int& best, double& best_d2) const;
    void radius_rec(int node, const Vec3& q, double r2, std::vector<int>& out) const;

    std::vector<Vec3> points_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

/// Convenience single query per the module contract; builds a throwaway tree.
/// For repeated queries against one cloud, build a KdTree once.
std::pair<int, double> nearest_neighbor(const Vec3& query, const PointCloud& target);

}  // namespace structmap
