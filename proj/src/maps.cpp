#include "covnav/maps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace covnav {

CoverMap build_cover_map(const PointCloud& cloud,
                         const std::vector<std::uint32_t>& cover_indices,
                         const GridSpec& spec) {
  GridMap<int> total(spec, 0);
  GridMap<int> cover(spec, 0);
  for (const Vec3& p : cloud.points)
    if (auto c = project_point(spec, p.x, p.y)) ++total(*c);
  for (std::uint32_t idx : cover_indices) {
    const Vec3& p = cloud.points.at(idx);
    if (auto c = project_point(spec, p.x, p.y)) ++cover(*c);
  }
  CoverMap out(spec, 0.0);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i)
      if (total(i, j) > 0)
        out(i, j) = static_cast<double>(cover(i, j)) / total(i, j);
  return out;
}

HeightMap build_height_map(const PointCloud& cloud, const GridSpec& spec,
                           double empty_fill) {
  HeightMap out(spec, empty_fill);
  GridMap<std::uint8_t> seen(spec, 0);
  for (const Vec3& p : cloud.points) {
    if (auto c = project_point(spec, p.x, p.y)) {
      if (!seen(*c)) {
        seen(*c) = 1;
        out(*c) = p.z;
      } else {
        out(*c) = std::max(out(*c), p.z);
      }
    }
  }
  return out;
}

GoalMap build_goal_map(const GridSpec& spec, double goal_x, double goal_y) {
  if (goal_x < spec.origin_x || goal_x >= spec.origin_x + spec.width * spec.cell_size ||
      goal_y < spec.origin_y || goal_y >= spec.origin_y + spec.height * spec.cell_size)
    throw std::invalid_argument("goal must lie inside the grid extent");

  GoalMap out;
  out.goal_x = goal_x;
  out.goal_y = goal_y;
  out.distance = GridMap<double>(spec, 0.0);
  out.angle = GridMap<double>(spec, 0.0);

  double max_d = 0.0;
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      const double dx = spec.center_x(i) - goal_x;
      const double dy = spec.center_y(j) - goal_y;
      const double d = std::sqrt(dx * dx + dy * dy);
      out.distance(i, j) = d;
      max_d = std::max(max_d, d);
      double theta = std::atan2(dy, dx);
      if (theta == -M_PI) theta = M_PI;
      out.angle(i, j) = theta;
    }
  if (max_d > 0.0)
    for (double& v : out.distance.cells()) v /= max_d;
  return out;
}

}  // namespace covnav
