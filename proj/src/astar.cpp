#include "covnav/astar.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace covnav {

namespace {

struct Node {
  double f;
  double h;
  std::size_t cell;
  bool operator>(const Node& o) const {
    if (f != o.f) return f > o.f;
    if (h != o.h) return h > o.h;
    return cell > o.cell;
  }
};

double octile(CellIndex a, CellIndex b, double cell_size) {
  const double dx = std::abs(a.i - b.i), dy = std::abs(a.j - b.j);
  return cell_size * (std::max(dx, dy) + (M_SQRT2 - 1.0) * std::min(dx, dy));
}

}  // namespace

AStarResult astar_grid(const GridSpec& spec,
                       const std::function<bool(CellIndex)>& passable,
                       const std::function<double(CellIndex)>& cell_cost,
                       double min_cell_cost, CellIndex start, CellIndex goal) {
  if (!spec.contains(start) || !spec.contains(goal))
    throw std::invalid_argument("astar: endpoint outside grid");
  if (min_cell_cost <= 0.0)
    throw std::invalid_argument("astar: min_cell_cost must be positive");

  AStarResult res;
  if (!passable(start) || !passable(goal)) return res;

  const std::size_t n = spec.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> g(n, kInf);
  std::vector<std::int32_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;

  const std::size_t s = spec.index(start);
  g[s] = 0.0;
  open.push({min_cell_cost * octile(start, goal, spec.cell_size),
             min_cell_cost * octile(start, goal, spec.cell_size), s});

  const int di[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dj[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  while (!open.empty()) {
    const Node top = open.top();
    open.pop();
    if (closed[top.cell]) continue;
    closed[top.cell] = 1;
    const CellIndex cur{static_cast<int>(top.cell) % spec.width,
                        static_cast<int>(top.cell) / spec.width};
    if (cur == goal) break;
    for (int k = 0; k < 8; ++k) {
      const CellIndex nb{cur.i + di[k], cur.j + dj[k]};
      if (!spec.contains(nb) || !passable(nb)) continue;
      if (k >= 4) {  // diagonal: both orthogonal neighbours must be open
        if (!passable({cur.i + di[k], cur.j}) ||
            !passable({cur.i, cur.j + dj[k]}))
          continue;
      }
      const std::size_t nidx = spec.index(nb);
      if (closed[nidx]) continue;
      const double step = (k >= 4 ? M_SQRT2 : 1.0) * spec.cell_size;
      const double cand = g[top.cell] + step * cell_cost(nb);
      if (cand < g[nidx]) {
        g[nidx] = cand;
        parent[nidx] = static_cast<std::int32_t>(top.cell);
        const double h = min_cell_cost * octile(nb, goal, spec.cell_size);
        open.push({cand + h, h, nidx});
      }
    }
  }

  const std::size_t gi = spec.index(goal);
  if (g[gi] == kInf) return res;
  res.found = true;
  res.cost = g[gi];
  for (std::int32_t at = static_cast<std::int32_t>(gi); at >= 0;
       at = parent[at])
    res.path.push_back(
        {static_cast<int>(at) % spec.width, static_cast<int>(at) / spec.width});
  std::reverse(res.path.begin(), res.path.end());
  return res;
}

double path_length_m(const std::vector<CellIndex>& path, double cell_size) {
  double len = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double di = path[k].i - path[k - 1].i;
    const double dj = path[k].j - path[k - 1].j;
    len += cell_size * std::sqrt(di * di + dj * dj);
  }
  return len;
}

}  // namespace covnav
