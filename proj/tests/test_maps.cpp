#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "covnav/maps.hpp"
#include "covnav/perception.hpp"
#include "covnav/rng.hpp"

using namespace covnav;

namespace {

PointCloud random_cloud(std::uint64_t seed, int n, double extent) {
  Rng rng(seed);
  PointCloud cloud;
  for (int k = 0; k < n; ++k)
    cloud.points.push_back({rng.uniform(-1.0, extent + 1.0),
                            rng.uniform(-1.0, extent + 1.0),
                            rng.uniform(0.0, 3.0)});
  return cloud;
}

// Naive per-cell oracles: loop over every (cell, point) pair.
CoverMap oracle_cover(const PointCloud& cloud,
                      const std::vector<std::uint32_t>& cover_idx,
                      const GridSpec& spec) {
  CoverMap out(spec, 0.0);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      int total = 0, covered = 0;
      for (std::uint32_t k = 0; k < cloud.points.size(); ++k) {
        const auto c = project_point(spec, cloud.points[k].x, cloud.points[k].y);
        if (!c || !(c->i == i && c->j == j)) continue;
        ++total;
        if (std::binary_search(cover_idx.begin(), cover_idx.end(), k)) ++covered;
      }
      if (total > 0) out(i, j) = static_cast<double>(covered) / total;
    }
  return out;
}

HeightMap oracle_height(const PointCloud& cloud, const GridSpec& spec,
                        double empty_fill) {
  HeightMap out(spec, empty_fill);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      bool any = false;
      double best = 0.0;
      for (const Vec3& p : cloud.points) {
        const auto c = project_point(spec, p.x, p.y);
        if (!c || !(c->i == i && c->j == j)) continue;
        best = any ? std::max(best, p.z) : p.z;
        any = true;
      }
      if (any) out(i, j) = best;
    }
  return out;
}

}  // namespace

TEST_CASE("cover map equals the naive oracle exactly") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const GridSpec spec{9, 7, 1.25, -1.0, -1.0};
    const PointCloud cloud = random_cloud(seed, 600, 9.0);
    // Arbitrary deterministic cover subset: every third point.
    std::vector<std::uint32_t> cover_idx;
    for (std::uint32_t k = 0; k < cloud.points.size(); k += 3)
      cover_idx.push_back(k);
    const CoverMap got = build_cover_map(cloud, cover_idx, spec);
    const CoverMap want = oracle_cover(cloud, cover_idx, spec);
    CHECK(got == want);
    for (double v : got.cells()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("cover map: cells with no points are zero, full-cover cell is one") {
  const GridSpec spec{3, 3, 1.0, 0.0, 0.0};
  PointCloud cloud;
  cloud.points = {{0.5, 0.5, 1}, {0.6, 0.5, 1}, {2.5, 2.5, 1}};
  const CoverMap map = build_cover_map(cloud, {0, 1}, spec);
  CHECK(map(0, 0) == 1.0);
  CHECK(map(2, 2) == 0.0);  // point present but not cover
  CHECK(map(1, 1) == 0.0);  // empty cell
}

TEST_CASE("height map equals the naive oracle exactly, empty_fill respected") {
  for (std::uint64_t seed = 11; seed <= 18; ++seed) {
    const GridSpec spec{8, 8, 0.9, 0.0, 0.0};
    const PointCloud cloud = random_cloud(seed, 300, 7.0);
    for (double fill : {0.0, -1.0}) {
      const HeightMap got = build_height_map(cloud, spec, fill);
      const HeightMap want = oracle_height(cloud, spec, fill);
      CHECK(got == want);
    }
  }
  // Negative heights survive (max of points, not max with zero).
  const GridSpec spec{2, 1, 1.0, 0.0, 0.0};
  PointCloud low;
  low.points = {{0.5, 0.5, -0.4}, {0.5, 0.4, -0.9}};
  const HeightMap m = build_height_map(low, spec, 0.0);
  CHECK(m(0, 0) == -0.4);
  CHECK(m(1, 0) == 0.0);
}

TEST_CASE("goal map: normalized distance, exact max of one, monotone order") {
  const GridSpec spec{12, 9, 1.0, 0.0, 0.0};
  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const double gx = rng.uniform(0.0, 12.0);
    const double gy = rng.uniform(0.0, 9.0);
    const GoalMap map = build_goal_map(spec, gx, gy);
    double max_v = 0.0;
    for (int j = 0; j < spec.height; ++j)
      for (int i = 0; i < spec.width; ++i) {
        max_v = std::max(max_v, map.distance(i, j));
        // Monotone in Euclidean distance: normalization preserves order.
        const double d1 = std::hypot(spec.center_x(i) - gx, spec.center_y(j) - gy);
        for (int q = 0; q < spec.width; ++q) {
          const double d2 = std::hypot(spec.center_x(q) - gx, spec.center_y(j) - gy);
          if (d1 < d2) CHECK(map.distance(i, j) <= map.distance(q, j));
        }
        const double theta = map.angle(i, j);
        CHECK(theta > -M_PI);
        CHECK(theta <= M_PI);
      }
    CHECK(max_v == 1.0);  // exhaustive scan: the farthest cell is exactly 1
  }
}

TEST_CASE("goal map: bearing points from the goal to the cell") {
  const GridSpec spec{5, 5, 1.0, 0.0, 0.0};
  const GoalMap map = build_goal_map(spec, 2.5, 2.5);  // center of (2,2)
  CHECK(map.angle(4, 2) == doctest::Approx(0.0));        // due east
  CHECK(map.angle(2, 4) == doctest::Approx(M_PI / 2));   // due north
  CHECK(map.angle(0, 2) == doctest::Approx(M_PI));       // due west, +pi side
  CHECK(map.angle(2, 0) == doctest::Approx(-M_PI / 2));  // due south
  CHECK(map.angle(0, 2) == M_PI);                        // exactly, not -pi
  CHECK(map.distance(2, 2) == 0.0);
}

TEST_CASE("goal map: goal must lie inside the grid extent") {
  const GridSpec spec{4, 4, 0.5, 1.0, 1.0};  // extent [1, 3) x [1, 3)
  CHECK_NOTHROW(build_goal_map(spec, 1.0, 1.0));
  CHECK_NOTHROW(build_goal_map(spec, 2.999, 2.999));
  CHECK_THROWS_AS(build_goal_map(spec, 3.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(build_goal_map(spec, 2.0, 0.999), std::invalid_argument);
}

TEST_CASE("goal map: single-cell grid has an all-zero distance channel") {
  const GridSpec spec{1, 1, 1.0, 0.0, 0.0};
  const GoalMap map = build_goal_map(spec, 0.5, 0.5);
  CHECK(map.distance(0, 0) == 0.0);
}
