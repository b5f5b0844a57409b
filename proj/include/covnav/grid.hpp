#pragma once

#include <cmath>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "covnav/geometry.hpp"

namespace covnav {

// Axis-aligned uniform grid over a rectangular region of the ground plane.
// Cell (i, j) covers [x_min + i*d, x_min + (i+1)*d) x [y_min + j*d, ...).
struct GridSpec {
  int width = 0;
  int height = 0;
  double cell_size = 1.0;
  double origin_x = 0.0;
  double origin_y = 0.0;

  bool operator==(const GridSpec&) const = default;

  std::size_t size() const { return static_cast<std::size_t>(width) * height; }
  bool contains(int i, int j) const {
    return i >= 0 && i < width && j >= 0 && j < height;
  }
  bool contains(CellIndex c) const { return contains(c.i, c.j); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * width + i;
  }
  std::size_t index(CellIndex c) const { return index(c.i, c.j); }
  double center_x(int i) const { return origin_x + (i + 0.5) * cell_size; }
  double center_y(int j) const { return origin_y + (j + 0.5) * cell_size; }
};

// Floor projection of a world point; points outside the extent map to
// nullopt rather than an error. A point exactly on the max edge is outside.
inline std::optional<CellIndex> project_point(const GridSpec& spec, double x,
                                              double y) {
  const int i = static_cast<int>(std::floor((x - spec.origin_x) / spec.cell_size));
  const int j = static_cast<int>(std::floor((y - spec.origin_y) / spec.cell_size));
  if (!spec.contains(i, j)) return std::nullopt;
  return CellIndex{i, j};
}

template <typename T>
class GridMap {
 public:
  GridMap() = default;
  GridMap(GridSpec spec, T fill = T{})
      : spec_(spec), cells_(spec.size(), fill) {}

  const GridSpec& spec() const { return spec_; }
  T& operator()(int i, int j) { return cells_[spec_.index(i, j)]; }
  const T& operator()(int i, int j) const { return cells_[spec_.index(i, j)]; }
  T& operator()(CellIndex c) { return cells_[spec_.index(c)]; }
  const T& operator()(CellIndex c) const { return cells_[spec_.index(c)]; }

  T& at(int i, int j) {
    if (!spec_.contains(i, j)) throw std::out_of_range("grid index");
    return (*this)(i, j);
  }
  const T& at(int i, int j) const {
    if (!spec_.contains(i, j)) throw std::out_of_range("grid index");
    return (*this)(i, j);
  }

  std::vector<T>& cells() { return cells_; }
  const std::vector<T>& cells() const { return cells_; }
  void fill(T v) { cells_.assign(cells_.size(), v); }

  bool operator==(const GridMap&) const = default;

 private:
  GridSpec spec_;
  std::vector<T> cells_;
};

using CoverMap = GridMap<double>;   // fraction of cover points per cell, [0, 1]
using HeightMap = GridMap<double>;  // max point height per cell, meters
using ThreatMap = GridMap<double>;  // cover-aware threat score per cell, [0, 1]

// Goal-relative field: distance channel normalized to max 1 over the grid,
// angle channel in (-pi, pi].
struct GoalMap {
  GridMap<double> distance;
  GridMap<double> angle;
  double goal_x = 0.0;
  double goal_y = 0.0;
};

// ---------------------------------------------------------------------------
// Text serialization. One header line
//   gridmap <role> <width> <height> <cell_size> <x_min> <y_min>
// followed by height rows of width values, row j on line j, printed with %.9g
// (round-trips doubles written from 9-significant-digit sources exactly).
// ---------------------------------------------------------------------------

void write_gridmap(std::ostream& os, const GridMap<double>& map,
                   const std::string& role);

struct NamedGridMap {
  std::string role;
  GridMap<double> map;
};

// Throws std::runtime_error on malformed input.
NamedGridMap read_gridmap(std::istream& is);

void save_gridmap(const std::string& path, const GridMap<double>& map,
                  const std::string& role);
NamedGridMap load_gridmap(const std::string& path);

}  // namespace covnav
