#include <doctest.h>

#include <cmath>
#include <sstream>

#include "covnav/errors.hpp"
#include "covnav/grid.hpp"
#include "covnav/rng.hpp"
#include "test_util.hpp"

using namespace covnav;

TEST_CASE("grid indexing and cell centers") {
  const GridSpec spec{4, 3, 0.5, -1.0, 2.0};
  CHECK(spec.size() == 12);
  CHECK(spec.contains(0, 0));
  CHECK(spec.contains(3, 2));
  CHECK_FALSE(spec.contains(4, 0));
  CHECK_FALSE(spec.contains(0, 3));
  CHECK_FALSE(spec.contains(-1, 0));
  CHECK(spec.index(1, 2) == 2 * 4 + 1);
  CHECK(spec.center_x(0) == doctest::Approx(-0.75));
  CHECK(spec.center_y(0) == doctest::Approx(2.25));
  CHECK(spec.center_x(3) == doctest::Approx(0.75));
}

TEST_CASE("project_point uses floor convention with max-edge exclusive") {
  const GridSpec spec{10, 10, 1.0, 0.0, 0.0};
  CHECK(project_point(spec, 0.0, 0.0) == CellIndex{0, 0});
  CHECK(project_point(spec, 0.999, 0.0) == CellIndex{0, 0});
  CHECK(project_point(spec, 1.0, 0.0) == CellIndex{1, 0});
  CHECK(project_point(spec, 9.999, 9.999) == CellIndex{9, 9});
  CHECK_FALSE(project_point(spec, 10.0, 0.0).has_value());
  CHECK_FALSE(project_point(spec, -0.001, 0.0).has_value());
  // Non-unit cell size and offset origin.
  const GridSpec s2{5, 5, 2.0, -5.0, -5.0};
  CHECK(project_point(s2, -5.0, -5.0) == CellIndex{0, 0});
  CHECK(project_point(s2, -3.0, -1.2) == CellIndex{1, 1});
  CHECK(project_point(s2, 4.999, 4.999) == CellIndex{4, 4});
}

TEST_CASE("gridmap text round trip is value-exact at 9 significant digits") {
  Rng rng(5);
  const GridSpec spec{7, 5, 0.25, -2.0, 3.5};
  GridMap<double> map(spec, 0.0);
  for (double& v : map.cells()) {
    // Values produced by formatting a double to 9 significant digits must be
    // recovered exactly after a write/read cycle.
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", rng.uniform(-100.0, 100.0));
    v = std::strtod(buf, nullptr);
  }
  std::stringstream ss;
  write_gridmap(ss, map, "cover");
  const NamedGridMap back = read_gridmap(ss);
  CHECK(back.role == "cover");
  CHECK(back.map.spec() == spec);
  REQUIRE(back.map.cells().size() == map.cells().size());
  for (std::size_t k = 0; k < map.cells().size(); ++k)
    CHECK(back.map.cells()[k] == map.cells()[k]);
}

TEST_CASE("gridmap header line format") {
  const GridSpec spec{3, 2, 1.0, 0.0, 0.0};
  GridMap<double> map(spec, 0.5);
  std::stringstream ss;
  write_gridmap(ss, map, "height");
  std::string line;
  std::getline(ss, line);
  CHECK(line == "gridmap height 3 2 1 0 0");
  std::getline(ss, line);
  CHECK(line == "0.5 0.5 0.5");
}

TEST_CASE("gridmap rejects malformed input") {
  const auto parse = [](const std::string& text) {
    std::stringstream ss(text);
    return read_gridmap(ss);
  };
  CHECK_THROWS_AS(parse("mapgrid cover 2 2 1 0 0\n0 0\n0 0\n"), IoError);
  CHECK_THROWS_AS(parse("gridmap cover 2 2 1 0\n"), IoError);
  CHECK_THROWS_AS(parse("gridmap cover 0 2 1 0 0\n"), IoError);
  CHECK_THROWS_AS(parse("gridmap cover 2 2 1 0 0\n0 0\n0\n"), IoError);
}

TEST_CASE("gridmap file save/load round trip and missing-file error") {
  testutil::TempDir tmp;
  const GridSpec spec{3, 3, 1.0, 0.0, 0.0};
  GridMap<double> map(spec, 0.0);
  map(1, 2) = 4.25;
  save_gridmap(tmp.file("m.grid"), map, "threat");
  const NamedGridMap back = load_gridmap(tmp.file("m.grid"));
  CHECK(back.role == "threat");
  CHECK(back.map == map);
  CHECK_THROWS_AS(load_gridmap(tmp.file("missing.grid")), IoError);
}

TEST_CASE("multiple blocks stream back to back") {
  const GridSpec spec{2, 2, 1.0, 0.0, 0.0};
  GridMap<double> a(spec, 1.0), b(spec, 2.0);
  std::stringstream ss;
  write_gridmap(ss, a, "goal_distance");
  write_gridmap(ss, b, "goal_angle");
  const NamedGridMap ra = read_gridmap(ss);
  const NamedGridMap rb = read_gridmap(ss);
  CHECK(ra.role == "goal_distance");
  CHECK(rb.role == "goal_angle");
  CHECK(ra.map == a);
  CHECK(rb.map == b);
}
