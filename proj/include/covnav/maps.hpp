#pragma once

#include <cstdint>
#include <vector>

#include "covnav/grid.hpp"
#include "covnav/world.hpp"

namespace covnav {

// Per-cell fraction of points flagged as cover; cells with no points are 0.
CoverMap build_cover_map(const PointCloud& cloud,
                         const std::vector<std::uint32_t>& cover_indices,
                         const GridSpec& spec);

// Per-cell max point height; cells with no points take empty_fill.
HeightMap build_height_map(const PointCloud& cloud, const GridSpec& spec,
                           double empty_fill = 0.0);

// Goal-relative distance (normalized so the farthest cell is 1) and bearing
// from the goal to each cell center, in (-pi, pi]. The goal must lie inside
// the grid extent (std::invalid_argument otherwise).
GoalMap build_goal_map(const GridSpec& spec, double goal_x, double goal_y);

}  // namespace covnav
