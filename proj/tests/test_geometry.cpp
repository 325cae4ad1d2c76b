#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "structmap/geometry/cluster.hpp"
#include "structmap/geometry/icp.hpp"
#include "structmap/geometry/kdtree.hpp"
#include "structmap/geometry/pca.hpp"
#include "structmap/geometry/ply.hpp"

#include <filesystem>
#include <random>

using namespace structmap;

namespace {

std::mt19937_64 rng_for(const char* tag) {
    std::seed_seq seq(tag, tag + std::char_traits<char>::length(tag));
    return std::mt19937_64(seq);
}

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 v(n(rng), n(rng), n(rng));
    while (v.norm() < 1e-6) v = Vec3(n(rng), n(rng), n(rng));
    return v.normalized();
}

Mat3 random_rotation(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    const Vec3 axis = random_unit(rng);
    return Eigen::AngleAxisd(angle(rng), axis).toRotationMatrix();
}

}  // namespace

TEST_CASE("pca: exact planar square") {
    PointCloud cloud({{0, 0, 2}, {1, 0, 2}, {0, 1, 2}, {1, 1, 2}}, FrameTag::Global);
    const PlaneFit fit = pca_plane_fit(cloud);
    CHECK(std::abs(std::abs(fit.normal().z()) - 1.0) < 1e-12);
    CHECK(std::abs(fit.normal().x()) < 1e-12);
    CHECK(fit.lambdas[2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit.centroid.isApprox(Vec3(0.5, 0.5, 2.0), 1e-12));
}

TEST_CASE("pca: noisy plane recovers generating normal within 2 degrees") {
    auto rng = rng_for("pca-noisy");
    const Vec3 n = Vec3(1, 1, 0).normalized();
    const Vec3 u = Vec3(1, -1, 0).normalized();
    const Vec3 v = n.cross(u);
    std::uniform_real_distribution<double> span(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.01);

    std::vector<Vec3> pts;
    for (int i = 0; i < 1000; ++i) {
        pts.push_back(span(rng) * u + span(rng) * v + noise(rng) * n);
    }
    const PlaneFit fit = pca_plane_fit(pts);
    CHECK(std::abs(fit.normal().dot(n)) >= std::cos(2.0 * M_PI / 180.0));
}

TEST_CASE("pca: degenerate inputs") {
    CHECK_THROWS_AS(pca_plane_fit(std::vector<Vec3>{{0, 0, 0}, {1, 1, 1}}), DegenerateCloud);
    std::vector<Vec3> collinear;
    for (int i = 0; i < 10; ++i) collinear.push_back(Vec3(i, 2.0 * i, -i));
    CHECK_THROWS_AS(pca_plane_fit(collinear), DegenerateCloud);
}

TEST_CASE("pca: orthonormal axes and eigen relation on random clouds") {
    auto rng = rng_for("pca-prop");
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vec3> pts;
        for (int i = 0; i < 60; ++i) pts.push_back(Vec3(coord(rng), coord(rng), 0.3 * coord(rng)));
        const PlaneFit fit = pca_plane_fit(pts);

        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(fit.axes[i].norm() - 1.0) < 1e-9);
            for (int j = i + 1; j < 3; ++j) {
                CHECK(std::abs(fit.axes[i].dot(fit.axes[j])) < 1e-9);
            }
        }
        CHECK(fit.lambdas[0] >= fit.lambdas[1]);
        CHECK(fit.lambdas[1] >= fit.lambdas[2]);

        // X * v3 == lambda3 * v3 within 1e-8 relative
        Mat3 cov = Mat3::Zero();
        Vec3 mean = Vec3::Zero();
        for (const auto& p : pts) mean += p;
        mean /= static_cast<double>(pts.size());
        for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
        cov /= static_cast<double>(pts.size());
        const Vec3 lhs = cov * fit.normal();
        const Vec3 rhs = fit.lambdas[2] * fit.normal();
        CHECK((lhs - rhs).norm() <= 1e-8 * std::max(1.0, fit.lambdas[0]));
    }
}

TEST_CASE("pca: rotation equivariance") {
    auto rng = rng_for("pca-equiv");
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 100; ++i) pts.push_back(Vec3(coord(rng), 0.5 * coord(rng), 0.1 * coord(rng)));
    const PlaneFit base = pca_plane_fit(pts);

    const Mat3 r = random_rotation(rng);
    std::vector<Vec3> rotated;
    for (const auto& p : pts) rotated.push_back(r * p);
    const PlaneFit rot = pca_plane_fit(rotated);

    for (int i = 0; i < 3; ++i) {
        CHECK(rot.lambdas[i] == doctest::Approx(base.lambdas[i]).epsilon(1e-9));
        CHECK(std::abs(std::abs(rot.axes[i].dot(r * base.axes[i])) - 1.0) < 1e-9);
    }
}

TEST_CASE("cluster: obvious gap and size filter") {
    const std::vector<Vec3> pts{{0, 0, 0}, {0.1, 0, 0}, {5, 0, 0}};
    auto two = euclidean_cluster(pts, 0.5, 1);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == std::vector<int>{0, 1});
    CHECK(two[1] == std::vector<int>{2});

    auto one = euclidean_cluster(pts, 0.5, 2);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == std::vector<int>{0, 1});
}

TEST_CASE("cluster: matches union-find oracle on two balls") {
    auto rng = rng_for("cluster-balls");
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 100; ++i) pts.push_back(Vec3(u(rng), u(rng), u(rng)));
    for (int i = 0; i < 100; ++i) pts.push_back(Vec3(10 + u(rng), u(rng), u(rng)));

    const double tol = 1.5;
    auto clusters = euclidean_cluster(pts, tol, 1);
    REQUIRE(clusters.size() == 2);

    // Brute-force union-find oracle.
    std::vector<int> parent(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) parent[i] = static_cast<int>(i);
    const std::function<int(int)> find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if ((pts[i] - pts[j]).norm() <= tol) {
                const int a = find(static_cast<int>(i)), b = find(static_cast<int>(j));
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
    }
    std::map<int, std::vector<int>> oracle;
    for (std::size_t i = 0; i < pts.size(); ++i) oracle[find(static_cast<int>(i))].push_back(i);
    REQUIRE(oracle.size() == clusters.size());
    std::size_t ci = 0;
    for (const auto& [root, members] : oracle) {
        CHECK(clusters[ci] == members);
        ++ci;
    }

    // Partition property: disjoint union covering all points.
    std::set<int> seen;
    for (const auto& c : clusters) {
        for (int i : c) CHECK(seen.insert(i).second);
    }
    CHECK(seen.size() == pts.size());
}

TEST_CASE("nearest neighbor: trivial cases") {
    PointCloud target({{1, 0, 0}, {0, 2, 0}}, FrameTag::Global);
    auto [idx, dist] = nearest_neighbor(Vec3(0, 0, 0), target);
    CHECK(idx == 0);
    CHECK(dist == doctest::Approx(1.0));

    auto [idx2, dist2] = nearest_neighbor(Vec3(0, 2, 0), target);
    CHECK(idx2 == 1);
    CHECK(dist2 == doctest::Approx(0.0));

    CHECK_THROWS_AS(nearest_neighbor(Vec3(0, 0, 0), PointCloud{}), EmptyTarget);
}

TEST_CASE("nearest neighbor: matches linear-scan oracle exactly, ties included") {
    auto rng = rng_for("nn-oracle");
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<int> grid(-3, 3);

    // Grid coordinates force exact distance ties; lowest index must win.
    std::vector<Vec3> pts;
    for (int i = 0; i < 500; ++i) pts.push_back(Vec3(u(rng), u(rng), u(rng)));
    for (int i = 0; i < 500; ++i) pts.push_back(Vec3(grid(rng), grid(rng), grid(rng)));

    KdTree tree(pts);
    for (int q = 0; q < 1000; ++q) {
        const Vec3 query = q % 2 == 0 ? Vec3(u(rng), u(rng), u(rng))
                                      : Vec3(grid(rng), grid(rng), grid(rng));
        int best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double d2 = (pts[i] - query).squaredNorm();
            if (d2 < best_d2) {
                best_d2 = d2;
                best = static_cast<int>(i);
            }
        }
        const auto [idx, dist] = tree.nearest(query);
        CHECK(idx == best);
        CHECK(dist == doctest::Approx(std::sqrt(best_d2)).epsilon(1e-12));
    }
}

TEST_CASE("kdtree: radius search returns sorted exact set") {
    auto rng = rng_for("radius");
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 300; ++i) pts.push_back(Vec3(u(rng), u(rng), u(rng)));
    KdTree tree(pts);
    for (int q = 0; q < 50; ++q) {
        const Vec3 query(u(rng), u(rng), u(rng));
        const double r = 0.8;
        auto got = tree.radius_search(query, r);
        std::vector<int> expected;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if ((pts[i] - query).norm() <= r) expected.push_back(static_cast<int>(i));
        }
        CHECK(got == expected);
    }
}

TEST_CASE("icp: identity on equal clouds") {
    auto rng = rng_for("icp-id");
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 80; ++i) pts.push_back(Vec3(u(rng), u(rng), u(rng)));
    PointCloud cloud(pts, FrameTag::Global);

    const IcpResult res = icp_register(cloud, cloud);
    CHECK(res.converged);
    CHECK((res.transform.rotation - Mat3::Identity()).norm() < 1e-9);
    CHECK(res.transform.translation.norm() < 1e-9);
    CHECK(res.mean_distance < 1e-9);
}

TEST_CASE("icp: recovers a small known transform") {
    auto rng = rng_for("icp-known");
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::vector<Vec3> pts;
    for (int i = 0; i < 200; ++i) pts.push_back(Vec3(u(rng), u(rng), 0.4 * u(rng)));
    PointCloud target(pts, FrameTag::Global);

    RigidTransform truth;
    truth.rotation = yaw_rotation(5.0 * M_PI / 180.0);
    truth.translation = Vec3(0.1, 0.0, 0.0);
    // source = inverse(truth) applied to target, so registering source onto
    // target must recover `truth`.
    const PointCloud source = truth.inverse().apply(target);

    const IcpResult res = icp_register(source, target, 80, 1e-10);
    CHECK(res.converged);
    CHECK(res.mean_distance < 1e-6);
    CHECK((res.transform.rotation - truth.rotation).norm() < 1e-4);
    CHECK((res.transform.translation - truth.translation).norm() < 1e-5);

    // Noiseless recovery bound: rotation error < 1e-4 rad.
    const Mat3 err = res.transform.rotation.transpose() * truth.rotation;
    const double angle = std::acos(std::clamp((err.trace() - 1.0) / 2.0, -1.0, 1.0));
    CHECK(angle < 1e-4);
}

TEST_CASE("icp: collinear source flags degeneracy") {
    PointCloud source({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, FrameTag::Global);
    PointCloud target({{0.05, 0, 0}, {1.05, 0, 0}, {2.05, 0, 0}}, FrameTag::Global);
    const IcpResult res = icp_register(source, target);
    CHECK((res.degenerate || res.converged));
    if (!res.degenerate) CHECK(res.mean_distance < 1e-6);
}

TEST_CASE("icp: frame mismatch rejected") {
    PointCloud a({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, FrameTag::Global);
    PointCloud b = a;
    b.frame = FrameTag::Camera;
    CHECK_THROWS_AS(icp_register(a, b), FrameMismatch);
}

TEST_CASE("ply: write/read round trip preserves doubles and frame") {
    auto rng = rng_for("ply");
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    PointCloud cloud(FrameTag::Camera);
    for (int i = 0; i < 64; ++i) cloud.points.push_back(Vec3(u(rng), u(rng), u(rng)));

    const std::string path =
        (std::filesystem::temp_directory_path() / "structmap_roundtrip.ply").string();
    write_ply(path, cloud);
    const PointCloud back = read_ply(path);
    REQUIRE(back.size() == cloud.size());
    CHECK(back.frame == FrameTag::Camera);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK(back.points[i] == cloud.points[i]);  // bit-exact via %.17g
    }
    std::filesystem::remove(path);
}

TEST_CASE("rigid transform: compose and inverse") {
    auto rng = rng_for("rigid");
    RigidTransform a, b;
    a.rotation = random_rotation(rng);
    a.translation = Vec3(0.3, -1.0, 2.0);
    b.rotation = random_rotation(rng);
    b.translation = Vec3(-0.5, 0.2, 0.1);

    const Vec3 p(0.7, -0.2, 1.1);
    CHECK((a.compose(b).apply(p) - a.apply(b.apply(p))).norm() < 1e-12);
    CHECK((a.compose(a.inverse()).apply(p) - p).norm() < 1e-12);
    CHECK(std::abs(a.rotation.determinant() - 1.0) < 1e-9);
}
