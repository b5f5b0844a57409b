#include "covnav/grid.hpp"
#include "covnav/errors.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace covnav {

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_gridmap(std::ostream& os, const GridMap<double>& map,
                   const std::string& role) {
  const GridSpec& s = map.spec();
  os << "gridmap " << role << ' ' << s.width << ' ' << s.height << ' '
     << format_value(s.cell_size) << ' ' << format_value(s.origin_x) << ' '
     << format_value(s.origin_y) << '\n';
  for (int j = 0; j < s.height; ++j) {
    for (int i = 0; i < s.width; ++i) {
      if (i) os << ' ';
      os << format_value(map(i, j));
    }
    os << '\n';
  }
}

NamedGridMap read_gridmap(std::istream& is) {
  std::string magic;
  NamedGridMap out;
  GridSpec spec;
  if (!(is >> magic) || magic != "gridmap")
    throw IoError("gridmap: bad header magic");
  if (!(is >> out.role >> spec.width >> spec.height >> spec.cell_size >>
        spec.origin_x >> spec.origin_y))
    throw IoError("gridmap: truncated header");
  if (spec.width <= 0 || spec.height <= 0 || spec.cell_size <= 0.0)
    throw IoError("gridmap: invalid dimensions");
  out.map = GridMap<double>(spec);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i)
      if (!(is >> out.map(i, j)))
        throw IoError("gridmap: truncated data");
  return out;
}

void save_gridmap(const std::string& path, const GridMap<double>& map,
                  const std::string& role) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for write: " + path);
  write_gridmap(os, map, role);
  if (!os) throw IoError("write failed: " + path);
}

NamedGridMap load_gridmap(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  return read_gridmap(is);
}

}  // namespace covnav
