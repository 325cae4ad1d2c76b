#include "structmap/geometry/cluster.hpp"

#include "structmap/geometry/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace structmap {

namespace {

int find_root(std::vector<int>& parent, int i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

void unite(std::vector<int>& parent, int a, int b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a == b) return;
    if (a > b) std::swap(a, b);  // keep the smaller index as root
    parent[b] = a;
}

}  // namespace

std::vector<std::vector<int>> euclidean_cluster(std::span<const Vec3> points, double tol,
                                                int min_size) {
    if (tol <= 0.0) throw Error("euclidean_cluster: tol must be positive");
    const int n = static_cast<int>(points.size());
    if (n == 0) return {};

    KdTree tree(std::vector<Vec3>(points.begin(), points.end()));
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (int i = 0; i < n; ++i) {
        for (int j : tree.radius_search(points[i], tol)) {
            if (j > i) unite(parent, i, j);
        }
    }

    std::vector<std::vector<int>> by_root(n);
    for (int i = 0; i < n; ++i) by_root[find_root(parent, i)].push_back(i);

    std::vector<std::vector<int>> clusters;
    for (int r = 0; r < n; ++r) {
        if (static_cast<int>(by_root[r].size()) >= std::max(1, min_size)) {
            clusters.push_back(std::move(by_root[r]));
        }
    }
    return clusters;
}

}  // namespace structmap
