#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "structmap/planner/cavity.hpp"
#include "structmap/planner/goal.hpp"
#include "structmap/planner/loop.hpp"
#include "structmap/planner/potential.hpp"

#include <random>
#include <set>

using namespace structmap;

namespace {

// Independent potential evaluation for the finite-difference oracle.
double oracle_potential(const Vec2& x, const Vec2& g, const std::vector<Vec2>& cells,
                        double alpha, double beta, double radius) {
    double value = alpha * ((x - g).dot(x - g));
    for (const Vec2& c : cells) {
        const double d = std::sqrt((x - c).dot(x - c));
        if (d <= radius) value += 1.0 / (beta * d);
    }
    return value;
}

LocalCostMap map_of(const std::vector<Vec2>& cells, const Vec2& center = Vec2::Zero(),
                    double half_extent = 10.0) {
    return LocalCostMap::from_cells(center, 0.1, half_extent, cells);
}

PotentialParams params_with(double alpha, double beta, double radius) {
    PotentialParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.repulse_radius = radius;
    p.step = 0.1;
    p.rho = 4.5;
    return p;
}

}  // namespace

TEST_CASE("gradient: attraction-only and zero at the goal") {
    const LocalCostMap empty = map_of({});
    const PotentialParams p = params_with(1.0, 0.05, 3.0);

    const auto g1 = potential_gradient(Vec2(0, 0), Vec2(2, 1), empty, p);
    CHECK((g1.neg_grad - Vec2(4, 2)).norm() < 1e-12);
    CHECK(!g1.clamped);

    const auto g2 = potential_gradient(Vec2(2, 1), Vec2(2, 1), empty, p);
    CHECK(g2.neg_grad.norm() < 1e-12);
}

TEST_CASE("gradient: single-obstacle hand value (7, 6)") {
    const LocalCostMap map = map_of({Vec2(1, 0)});
    const PotentialParams p = params_with(1.0, 1.0, 3.0);
    const auto g = potential_gradient(Vec2(0, 0), Vec2(4, 3), map, p);
    CHECK(g.neg_grad.x() == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(g.neg_grad.y() == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("gradient: matches central finite differences of the potential") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> coord(-4.0, 4.0);
    std::uniform_int_distribution<int> n_cells(0, 20);

    const double alpha = 1.0, beta = 0.05, radius = 3.0;
    const PotentialParams p = params_with(alpha, beta, radius);
    const double h = 1e-5;

    int tested = 0;
    while (tested < 1000) {
        std::vector<Vec2> cells;
        const int n = n_cells(rng);
        for (int i = 0; i < n; ++i) cells.push_back(Vec2(coord(rng), coord(rng)));
        const Vec2 x(coord(rng), coord(rng));
        const Vec2 g(coord(rng), coord(rng));

        // The potential is non-differentiable on each repulsion-disc rim and
        // blows up at cell centers; keep clear of both.
        bool valid = true;
        for (const Vec2& c : cells) {
            const double d = (x - c).norm();
            if (std::abs(d - radius) < 0.01 || d < 0.08) valid = false;
        }
        if (!valid) continue;

        const LocalCostMap map = map_of(cells);
        const auto grad = potential_gradient(x, g, map, p);
        const Vec2 fd(
            -(oracle_potential(x + Vec2(h, 0), g, cells, alpha, beta, radius) -
              oracle_potential(x - Vec2(h, 0), g, cells, alpha, beta, radius)) / (2 * h),
            -(oracle_potential(x + Vec2(0, h), g, cells, alpha, beta, radius) -
              oracle_potential(x - Vec2(0, h), g, cells, alpha, beta, radius)) / (2 * h));
        const double scale = std::max(1.0, fd.norm());
        CHECK((grad.neg_grad - fd).norm() / scale < 1e-6);
        ++tested;
    }
}

TEST_CASE("gradient: clamps inside half a cell of an obstacle") {
    const LocalCostMap map = map_of({Vec2(0, 0)});
    const PotentialParams p = params_with(1.0, 0.05, 3.0);
    const auto g = potential_gradient(Vec2(0.01, 0), Vec2(2, 0), map, p);
    CHECK(g.clamped);
    CHECK(std::isfinite(g.neg_grad.x()));
}

TEST_CASE("costmap: build from clouds matches direct rasterization") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    std::uniform_real_distribution<double> uz(-0.5, 3.0);

    PointCloud cloud(FrameTag::Global);
    for (int i = 0; i < 2000; ++i) cloud.points.push_back(Vec3(u(rng), u(rng), uz(rng)));

    const Vec3 center(0.5, -0.25, 0.8);
    const double rho = 3.0, cell = 0.1, h_max = 2.5;
    const LocalCostMap map = LocalCostMap::build(center, std::vector<PointCloud>{cloud}, rho,
                                                 cell, h_max);

    std::set<std::pair<int, int>> expected;
    for (const Vec3& p : cloud.points) {
        if (p.z() <= 0.0 || p.z() > h_max) continue;
        const double ox = center.x() - rho, oy = center.y() - rho;
        const int ix = static_cast<int>(std::floor((p.x() - ox) / cell));
        const int iy = static_cast<int>(std::floor((p.y() - oy) / cell));
        if (ix < 0 || iy < 0 || ix >= 60 || iy >= 60) continue;
        expected.insert({ix, iy});
    }
    CHECK(map.occupied_centers().size() == expected.size());

    const LocalCostMap none = LocalCostMap::build(center, std::vector<PointCloud>{}, rho, cell,
                                                  h_max);
    CHECK(none.occupied_centers().empty());
}

TEST_CASE("plan: straight line with no obstacles") {
    const LocalCostMap empty = map_of({});
    const PotentialParams p = params_with(1.0, 0.05, 3.0);
    const LocalPath path = plan_to_point(Vec2(0, 0), Vec2(1, 0), empty, p);
    CHECK(path.status == PathStatus::Reached);
    for (const Vec2& x : path.polyline) CHECK(std::abs(x.y()) < 1e-9);
}

TEST_CASE("plan: slides along a straight wall inside the stand-off band") {
    // Wall cells along y=0; start at stand-off D above it, goal far along it.
    std::vector<Vec2> wall;
    for (double x = -2.0; x <= 12.0; x += 0.1) wall.push_back(Vec2(x, 0.0));
    const LocalCostMap map = map_of(wall, Vec2(5, 3), 12.0);
    const PotentialParams p = params_with(1.0, 0.05, 3.0);

    GoalSpec spec;
    spec.p_bar = Vec3(8.0, 0.0, 0.0);
    spec.n = Vec3(0, -1, 0);  // looking at the wall from above
    spec.r = Vec3::UnitZ().cross(spec.n);
    spec.step_len = 0.5;
    spec.distance = 3.0;

    const LocalPath path = plan_local_path(Vec2(0, 3.0), spec, map, p);
    CHECK(path.status == PathStatus::Reached);
    double min_y = 1e9, max_y = -1e9;
    for (const Vec2& x : path.polyline) {
        min_y = std::min(min_y, x.y());
        max_y = std::max(max_y, x.y());
    }
    // wall tracking: distance to the wall stays within D +/- 2 cells
    CHECK(min_y >= 3.0 - 0.2);
    CHECK(max_y <= 3.0 + 0.2);
}

TEST_CASE("plan: curves around an obstacle cluster without entering the band") {
    // A blob of occupied cells between start and goal.
    std::vector<Vec2> blob;
    for (double x = 1.6; x <= 2.4; x += 0.1)
        for (double y = 1.0; y <= 1.8; y += 0.1) blob.push_back(Vec2(x, y));
    const LocalCostMap map = map_of(blob, Vec2(2, 1.5), 8.0);
    PotentialParams p = params_with(1.0, 0.05, 1.0);

    const LocalPath path = plan_to_point(Vec2(0, 0), Vec2(4, 3), map, p);
    CHECK(path.status == PathStatus::Reached);
    double min_clearance = 1e9;
    for (const Vec2& x : path.polyline) min_clearance = std::min(min_clearance, map.clearance(x));
    CHECK(min_clearance > 0.35);  // never plows through the blob
}

TEST_CASE("plan: goal pointing away from the structure shrinks the stand-off") {
    std::vector<Vec2> wall;
    for (double x = -4.0; x <= 4.0; x += 0.1) wall.push_back(Vec2(x, 0.0));
    const LocalCostMap map = map_of(wall, Vec2(0, 2.5), 8.0);
    const PotentialParams p = params_with(1.0, 0.05, 3.0);

    // Start on the stand-off boundary; the pure sideways goal has no
    // component toward the wall, so the stand-off must shrink until it does.
    GoalSpec spec;
    spec.p_bar = Vec3(0.0, 0.0, 0.0);
    spec.n = Vec3(0, -1, 0);
    spec.r = Vec3(1, 0, 0);
    spec.step_len = 0.5;
    spec.distance = 3.0;

    // Start slightly inside the band so the outward goal clearly points away.
    const LocalPath path = plan_local_path(Vec2(0, 2.9), spec, map, p);
    CHECK(path.goal_adjusted);
    CHECK(path.used_distance < 3.0);
    CHECK(path.used_distance >= map.cell());
}

TEST_CASE("plan: stuck in a local minimum reports Stuck") {
    // A C-shaped trap around the start, goal beyond the closed side.
    std::vector<Vec2> trap;
    for (double t = -1.0; t <= 1.0; t += 0.1) {
        trap.push_back(Vec2(1.0, t));
        trap.push_back(Vec2(t, 1.0));
        trap.push_back(Vec2(t, -1.0));
    }
    const LocalCostMap map = map_of(trap, Vec2(0, 0), 6.0);
    PotentialParams p = params_with(1.0, 0.5, 1.2);
    const LocalPath path = plan_to_point(Vec2(0, 0), Vec2(4, 0), map, p);
    CHECK(path.status != PathStatus::Reached);
}

TEST_CASE("next goal: axis-aligned wall hand case is exact") {
    // Wall plane at camera-frame x = 5, y in [-2, 2], z in {0, 0.5, 1}. The
    // slice members {0.9, 1.1, 2} average to 4/3 so the expected goal is
    // exactly (2, 2, 0.5) with D = 3.
    PointCloud cloud(FrameTag::Camera);
    for (const double y : {-2.0, -1.0, 0.0, 0.9, 1.1, 2.0}) {
        for (const double z : {0.0, 0.5, 1.0}) {
            cloud.points.push_back(Vec3(5.0, y, z));
        }
    }
    const CameraGoal goal = compute_next_goal(cloud, 3.0, 1.0, 0.05);
    CHECK((goal.n - Vec3(1, 0, 0)).norm() < 1e-9);
    CHECK((goal.r - Vec3(0, 1, 0)).norm() < 1e-9);
    CHECK(std::abs(goal.step_len - 2.0 / 3.0) < 1e-9);
    CHECK((goal.goal - Vec3(2.0, 2.0, 0.5)).norm() < 1e-9);
}

TEST_CASE("next goal: dense uniform wall approximates the same target") {
    PointCloud cloud(FrameTag::Camera);
    for (double y = -2.0; y <= 2.0 + 1e-9; y += 0.1) {
        for (double z = 0.0; z <= 1.0 + 1e-9; z += 0.25) {
            cloud.points.push_back(Vec3(5.0, y, z));
        }
    }
    const CameraGoal goal = compute_next_goal(cloud, 3.0, 1.0, 0.05);
    CHECK((goal.goal - Vec3(2.0, 2.0, 0.5)).norm() < 0.05);
}

TEST_CASE("next goal: equivariant under horizontal translation") {
    // Translation shifts all camera-frame y equally, so slice membership and
    // the goal commute exactly.
    PointCloud cloud(FrameTag::Camera);
    for (const double y : {-2.0, -1.0, 0.0, 0.9, 1.1, 2.0}) {
        for (const double z : {0.0, 0.5, 1.0}) cloud.points.push_back(Vec3(4.0, y, z));
    }
    const CameraGoal base = compute_next_goal(cloud, 3.0, 1.0, 0.05);

    const Vec3 t(0.4, -0.3, 0.0);
    PointCloud moved(FrameTag::Camera);
    for (const auto& p : cloud.points) moved.points.push_back(p + t);

    const CameraGoal shifted = compute_next_goal(moved, 3.0, 1.0, 0.05);
    CHECK((shifted.goal - (base.goal + t)).norm() < 1e-9);
    CHECK((shifted.n - base.n).norm() < 1e-9);
    CHECK(shifted.step_len == doctest::Approx(base.step_len).epsilon(1e-9));
}

TEST_CASE("next goal: wall yawed about its slice centroid turns the goal with it") {
    // A wall is a line in the horizontal plane, so camera-frame y is affine
    // in arclength and a modest yaw keeps slice membership identical: the
    // fitted plane, its normal and the centroid all rotate rigidly. The
    // sideways step is measured along the camera's own y axis, so it scales
    // by cos(yaw); the goal matches the rotated one up to that known term.
    PointCloud cloud(FrameTag::Camera);
    for (const double y : {-2.0, -1.0, 0.0, 0.9, 1.1, 2.0}) {
        for (const double z : {0.0, 0.5, 1.0}) cloud.points.push_back(Vec3(4.0, y, z));
    }
    const CameraGoal base = compute_next_goal(cloud, 3.0, 1.0, 0.05);

    const double gamma = 0.5;
    const Mat3 r = yaw_rotation(gamma);
    PointCloud moved(FrameTag::Camera);
    for (const auto& p : cloud.points) {
        moved.points.push_back(r * (p - base.p_bar) + base.p_bar);
    }

    const CameraGoal rotated = compute_next_goal(moved, 3.0, 1.0, 0.05);
    CHECK((rotated.p_bar - base.p_bar).norm() < 1e-9);
    CHECK((rotated.n - r * base.n).norm() < 1e-9);
    CHECK((rotated.r - r * base.r).norm() < 1e-9);
    CHECK(rotated.step_len == doctest::Approx(std::cos(gamma) * base.step_len).epsilon(1e-9));

    const Vec3 rotated_goal_about_centroid = r * (base.goal - base.p_bar) + base.p_bar;
    const double step_term = (1.0 - std::cos(gamma)) * base.step_len;
    CHECK((rotated.goal - rotated_goal_about_centroid).norm() <= step_term + 1e-9);
}

TEST_CASE("next goal: corner cloud slices onto the far segment only") {
    // Near segment runs along x (normal +y), far segment perpendicular
    // ahead-left with normal +x. The forward slice (largest camera-frame y)
    // contains only far-segment points, so n must be the far normal.
    PointCloud cloud(FrameTag::Camera);
    for (double x = 0.0; x <= 3.0; x += 0.1) {
        for (double z = 0.0; z <= 0.6; z += 0.2) cloud.points.push_back(Vec3(x, 1.0 + 0.0, z));
    }
    for (double y = 1.2; y <= 3.6; y += 0.1) {
        for (double z = 0.0; z <= 0.6; z += 0.2) cloud.points.push_back(Vec3(3.2, y, z));
    }
    const CameraGoal goal = compute_next_goal(cloud, 3.0, 1.0, 0.05);
    CHECK(std::abs(goal.n.y()) < 1e-9);
    CHECK(goal.n.x() == doctest::Approx(1.0));
}

TEST_CASE("next goal: errors") {
    PointCloud ground_only(FrameTag::Camera);
    for (double x = 1.0; x < 3.0; x += 0.2) ground_only.points.push_back(Vec3(x, 0.0, -1.0));
    CHECK_THROWS_AS(compute_next_goal(ground_only, 3.0, 1.0, 0.05), EmptyAfterGroundRemoval);

    PointCloud collinear(FrameTag::Camera);
    for (int i = 0; i < 10; ++i) collinear.points.push_back(Vec3(3.0, 0.1 * i, 0.0));
    CHECK_THROWS_AS(compute_next_goal(collinear, 3.0, 1.0, 0.05), DegenerateSlice);
}

TEST_CASE("loop monitor: stationary, clockwise square, retrace") {
    LoopMonitor still(Vec2(0, 0), Vec2(3, 0));
    for (int i = 0; i < 10; ++i) still.update(Vec2(3, 0));
    CHECK(still.theta() == doctest::Approx(0.0));
    CHECK(!still.lap_done());

    // Clockwise square circuit around the reference.
    LoopMonitor square(Vec2(0, 0), Vec2(3, 3));
    std::vector<Vec2> corners{{3, -3}, {-3, -3}, {-3, 3}, {3, 3}};
    Vec2 prev(3, 3);
    for (const Vec2& corner : corners) {
        for (int i = 1; i <= 60; ++i) {
            square.update(prev + (corner - prev) * (i / 60.0));
        }
        prev = corner;
    }
    CHECK(square.theta() == doctest::Approx(-2.0 * M_PI).epsilon(1e-9));
    CHECK(square.lap_done());

    // Half loop clockwise then retrace: theta returns to ~0, no lap.
    LoopMonitor half(Vec2(0, 0), Vec2(3, 0));
    std::vector<Vec2> arc;
    for (int i = 0; i <= 90; ++i) {
        const double a = -i * M_PI / 90.0;
        arc.push_back(Vec2(3 * std::cos(a), 3 * std::sin(a)));
    }
    for (const Vec2& p : arc) half.update(p);
    for (auto it = arc.rbegin(); it != arc.rend(); ++it) half.update(*it);
    CHECK(half.theta() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(!half.lap_done());
}

TEST_CASE("loop monitor: theta is a pure function of the polyline") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    std::vector<Vec2> path;
    for (int i = 0; i < 200; ++i) path.push_back(Vec2(5 + u(rng), u(rng)));

    LoopMonitor a(Vec2(0, 0), path.front());
    for (const auto& p : path) a.update(p);

    double theta = 0.0;
    double prev = std::atan2(path.front().y(), path.front().x());
    for (const auto& p : path) {
        const double angle = std::atan2(p.y(), p.x());
        theta += wrap_angle(angle - prev);
        prev = angle;
    }
    CHECK(a.theta() == doctest::Approx(theta).epsilon(1e-12));
}

TEST_CASE("adapt_delta: open space returns the full stand-off") {
    const LocalCostMap empty = map_of({});
    const PotentialParams p = params_with(1.0, 0.05, 3.0);
    GoalSpec spec;
    spec.p_bar = Vec3(5, 0, 0);
    spec.n = Vec3(1, 0, 0);
    spec.r = Vec3(0, 1, 0);
    spec.step_len = 0.3;
    const auto delta = adapt_delta(spec, empty, p, 0.5, 0.25, 3.0);
    REQUIRE(delta.has_value());
    CHECK(*delta == doctest::Approx(3.0));
}

TEST_CASE("adapt_delta: corridor settles near half the width") {
    // Corridor walls at y = 0 and y = 3.8 (clear width 3.8): candidate goals
    // g(delta) = p_bar - delta*n step along -n = +y from the tracked wall.
    for (const double width : {3.8, 2.8}) {
        std::vector<Vec2> cells;
        for (double x = -3.0; x <= 3.0; x += 0.1) {
            cells.push_back(Vec2(x, 0.0));
            cells.push_back(Vec2(x, width));
        }
        const LocalCostMap map = map_of(cells, Vec2(0, width / 2), 8.0);
        const PotentialParams p = params_with(1.0, 0.05, 3.0);
        GoalSpec spec;
        spec.p_bar = Vec3(0, 0, 0);
        spec.n = Vec3(0, -1, 0);  // camera looks at the y=0 wall
        spec.r = Vec3::UnitZ().cross(spec.n);
        spec.step_len = 0.0;

        // Exhaustive oracle over the same grid with the selection-scan
        // radius (the whole local map).
        PotentialParams scan = p;
        scan.repulse_radius = 2.0 * p.rho;
        std::vector<double> grid;
        for (double d = 0.5; d < 3.0 - 1e-9; d += 0.25) grid.push_back(d);
        grid.push_back(3.0);
        double best = 1e300;
        double best_delta = 3.0;
        for (const double d : grid) {
            const Vec2 g = spec.point_at(d).head<2>();
            const double cost = potential_value(g, g, map, scan);
            if (cost < best) {
                best = cost;
                best_delta = d;
            }
        }

        const auto delta = adapt_delta(spec, map, p, 0.5, 0.25, 3.0);
        REQUIRE(delta.has_value());
        CHECK(std::abs(*delta - width / 2) <= 0.25 + 1e-9);
        CHECK(std::abs(*delta - best_delta) <= 0.25 + 1e-9);
    }
}

TEST_CASE("adapt_delta: cavity narrower than twice delta_min is infeasible") {
    std::vector<Vec2> cells;
    for (double x = -2.0; x <= 2.0; x += 0.1) {
        cells.push_back(Vec2(x, 0.0));
        cells.push_back(Vec2(x, 0.8));  // clear width below 2 * 0.5
    }
    const LocalCostMap map = map_of(cells, Vec2(0, 0.4), 6.0);
    const PotentialParams p = params_with(1.0, 0.05, 3.0);
    GoalSpec spec;
    spec.p_bar = Vec3(0, 0, 0);
    spec.n = Vec3(0, -1, 0);
    spec.r = Vec3(1, 0, 0);
    spec.step_len = 0.0;
    CHECK(!adapt_delta(spec, map, p, 0.5, 0.25, 3.0).has_value());
}
