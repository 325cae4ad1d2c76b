#include "structmap/geometry/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace structmap {

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) return;
    nodes_.reserve(points_.size());
    std::vector<int> scratch(points_.size());
    std::iota(scratch.begin(), scratch.end(), 0);
    root_ = build(0, static_cast<int>(scratch.size()), scratch);
}

int KdTree::build(int begin, int end, std::vector<int>& scratch) {
    if (begin >= end) return -1;

    // Split along the axis of largest extent; ties x < y < z.
    Vec3 lo = points_[scratch[begin]], hi = lo;
    for (int i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[scratch[i]]);
        hi = hi.cwiseMax(points_[scratch[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);

    const int mid = begin + (end - begin) / 2;
    std::nth_element(scratch.begin() + begin, scratch.begin() + mid, scratch.begin() + end,
                     [&](int a, int b) {
                         const double ca = points_[a](axis), cb = points_[b](axis);
                         if (ca != cb) return ca < cb;
                         return a < b;
                     });

    Node node;
    node.index = scratch[mid];
    node.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(begin, mid, scratch);
    const int right = build(mid + 1, end, scratch);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

void KdTree::nearest_rec(int node, const Vec3& q, int& best, double& best_d2) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const Vec3& p = points_[n.index];
    const double d2 = (p - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && n.index < best)) {
        best_d2 = d2;
        best = n.index;
    }
    const double delta = q(n.axis) - p(n.axis);
    const int near_side = delta < 0.0 ? n.left : n.right;
    const int far_side = delta < 0.0 ? n.right : n.left;
    nearest_rec(near_side, q, best, best_d2);
    if (delta * delta <= best_d2) nearest_rec(far_side, q, best, best_d2);
}

std::pair<int, double> KdTree::nearest(const Vec3& query) const {
    if (points_.empty()) throw EmptyTarget("KdTree::nearest: empty target cloud");
    int best = static_cast<int>(points_.size());
    double best_d2 = std::numeric_limits<double>::infinity();
    nearest_rec(root_, query, best, best_d2);
    return {best, std::sqrt(best_d2)};
}

void KdTree::radius_rec(int node, const Vec3& q, double r2, std::vector<int>& out) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const Vec3& p = points_[n.index];
    if ((p - q).squaredNorm() <= r2) out.push_back(n.index);
    const double delta = q(n.axis) - p(n.axis);
    const int near_side = delta < 0.0 ? n.left : n.right;
    const int far_side = delta < 0.0 ? n.right : n.left;
    radius_rec(near_side, q, r2, out);
    if (delta * delta <= r2) radius_rec(far_side, q, r2, out);
}

std::vector<int> KdTree::radius_search(const Vec3& query, double radius) const {
    std::vector<int> out;
    if (points_.empty() || radius < 0.0) return out;
    radius_rec(root_, query, radius * radius, out);
    std::sort(out.begin(), out.end());
    return out;
}

std::pair<int, double> nearest_neighbor(const Vec3& query, const PointCloud& target) {
    if (target.empty()) throw EmptyTarget("nearest_neighbor: empty target cloud");
    KdTree tree(target.points);
    return tree.nearest(query);
}

}  // namespace structmap
