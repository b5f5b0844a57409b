#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

namespace covnav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct CellIndex {
  int i = 0;
  int j = 0;
  bool operator==(const CellIndex&) const = default;
};

inline double sq(double v) { return v * v; }

// Wraps an angle into (-pi, pi]; -pi maps to +pi.
inline double wrap_angle(double a) {
  const double two_pi = 2.0 * M_PI;
  double r = std::fmod(a + M_PI, two_pi);
  if (r <= 0.0) r += two_pi;
  return r - M_PI;
}

inline int sgn(double v) { return (v > 0.0) - (v < 0.0); }
inline int sgn(int v) { return (v > 0) - (v < 0); }

// ---------------------------------------------------------------------------
// Grid-line traversals.
//
// Two flavours are needed:
//  * cell_to_cell_ray: integer-exact walk between two cell centers, visiting
//    only cells the segment crosses with positive length. A crossing that hits
//    a cell corner exactly steps diagonally; the two cells touched only at the
//    corner are skipped. Used for line-of-sight checks, where a grazing corner
//    must not block.
//  * swept_cells: floating-point walk along an arbitrary world-frame segment,
//    visiting every cell the segment passes through *including* exact corner
//    touches. Used for motion footprints, where grazing a blocked cell counts
//    as contact.
// ---------------------------------------------------------------------------

// Cells strictly entered by the segment between the centers of a and b,
// ordered from a to b, endpoints included.
inline std::vector<CellIndex> cell_to_cell_ray(CellIndex a, CellIndex b) {
  std::vector<CellIndex> out;
  const int di = b.i - a.i, dj = b.j - a.j;
  const int adi = std::abs(di), adj = std::abs(dj);
  const int si = sgn(di), sj = sgn(dj);
  out.reserve(static_cast<std::size_t>(adi + adj + 1));
  CellIndex cur = a;
  out.push_back(cur);
  long long nx = 0, ny = 0;  // boundary crossings taken along i and j
  while (!(cur == b)) {
    if (adj == 0) {
      cur.i += si;
      ++nx;
    } else if (adi == 0) {
      cur.j += sj;
      ++ny;
    } else {
      // Next i-boundary at t = (2nx+1)/(2|di|), next j-boundary at
      // (2ny+1)/(2|dj|); compare cross-multiplied to stay in integers.
      const long long lhs = (2 * nx + 1) * adj;
      const long long rhs = (2 * ny + 1) * adi;
      if (lhs < rhs) {
        cur.i += si;
        ++nx;
      } else if (lhs > rhs) {
        cur.j += sj;
        ++ny;
      } else {  // exact corner: step diagonally, skip the touching cells
        cur.i += si;
        cur.j += sj;
        ++nx;
        ++ny;
      }
    }
    out.push_back(cur);
  }
  return out;
}

// Every cell touched by the world-frame segment p0->p1 on a grid with the
// given origin and cell size, in travel order, endpoints included. Exact
// corner crossings also report the two cells touched only at the corner.
// Cells are raw indices; callers clip against grid bounds.
inline std::vector<CellIndex> swept_cells(Vec2 p0, Vec2 p1, double origin_x,
                                          double origin_y, double cell_size) {
  const double ux0 = (p0.x - origin_x) / cell_size;
  const double uy0 = (p0.y - origin_y) / cell_size;
  const double ux1 = (p1.x - origin_x) / cell_size;
  const double uy1 = (p1.y - origin_y) / cell_size;

  int i = static_cast<int>(std::floor(ux0));
  int j = static_cast<int>(std::floor(uy0));
  const int i1 = static_cast<int>(std::floor(ux1));
  const int j1 = static_cast<int>(std::floor(uy1));

  std::vector<CellIndex> out;
  out.push_back({i, j});
  if (i == i1 && j == j1) return out;

  const double dx = ux1 - ux0, dy = uy1 - uy0;
  const int si = sgn(dx), sj = sgn(dy);
  // Parameter t of the next boundary crossing in each axis.
  double t_max_x = std::numeric_limits<double>::infinity();
  double t_max_y = std::numeric_limits<double>::infinity();
  double t_delta_x = std::numeric_limits<double>::infinity();
  double t_delta_y = std::numeric_limits<double>::infinity();
  if (si != 0) {
    const double first = (si > 0) ? (std::floor(ux0) + 1.0 - ux0) : (ux0 - std::floor(ux0));
    t_delta_x = 1.0 / std::abs(dx);
    t_max_x = first / std::abs(dx);
  }
  if (sj != 0) {
    const double first = (sj > 0) ? (std::floor(uy0) + 1.0 - uy0) : (uy0 - std::floor(uy0));
    t_delta_y = 1.0 / std::abs(dy);
    t_max_y = first / std::abs(dy);
  }

  // Bound: each loop advances at least one axis crossing.
  const int max_steps = std::abs(i1 - i) + std::abs(j1 - j) + 4;
  for (int step = 0; step < max_steps && !(i == i1 && j == j1); ++step) {
    if (t_max_x < t_max_y) {
      i += si;
      t_max_x += t_delta_x;
      out.push_back({i, j});
    } else if (t_max_y < t_max_x) {
      j += sj;
      t_max_y += t_delta_y;
      out.push_back({i, j});
    } else {  // exact corner: report both side cells, then cross diagonally
      if (t_max_x <= 1.0) {
        out.push_back({i + si, j});
        out.push_back({i, j + sj});
      }
      i += si;
      j += sj;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
      out.push_back({i, j});
    }
  }
  return out;
}

}  // namespace covnav
