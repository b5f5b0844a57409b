#pragma once

#include <functional>
#include <vector>

#include "covnav/grid.hpp"

namespace covnav {

struct AStarResult {
  bool found = false;
  std::vector<CellIndex> path;  // start..goal inclusive when found
  double cost = 0.0;
};

// 8-connected grid search. Moving into cell n over step length L (1 or
// sqrt(2) cells, scaled by cell_size) costs L * cell_cost(n); cell_cost must
// be >= min_cell_cost > 0 for the heuristic to stay admissible. Diagonal
// moves require both orthogonal neighbours passable (no corner cutting).
// Deterministic: ties expand the lower flat index first.
AStarResult astar_grid(const GridSpec& spec,
                       const std::function<bool(CellIndex)>& passable,
                       const std::function<double(CellIndex)>& cell_cost,
                       double min_cell_cost, CellIndex start, CellIndex goal);

// Path length in meters (sum of center-to-center steps).
double path_length_m(const std::vector<CellIndex>& path, double cell_size);

}  // namespace covnav
