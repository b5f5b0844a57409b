#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "covnav/dataset.hpp"
#include "covnav/errors.hpp"
#include "covnav/rng.hpp"
#include "test_util.hpp"

using namespace covnav;
using namespace testutil;

namespace {

GridSpec make_spec(int w, int h, double d = 1.0, double ox = 0.0,
                   double oy = 0.0) {
  GridSpec s;
  s.width = w;
  s.height = h;
  s.cell_size = d;
  s.origin_x = ox;
  s.origin_y = oy;
  return s;
}

Dataset sample_dataset() {
  Dataset ds;
  ds.grid = make_spec(8, 8, 1.0, -1.0, 2.0);
  ds.seed = 12345;
  ds.augmentations = {"rot90", "shift:1,-2"};
  ds.hyperparameters_json = "{\"alpha\":0.2,\"lr\":0.5}";
  ds.transitions = {
      {513, 7, 2.5, 48879, 1},
      {0, 0, -0.125, 3199, 0},
      {3199, 24, 0.0, 0, 1},
  };
  return ds;
}

}  // namespace

TEST_CASE("transition records are 14 bytes, little-endian") {
  TempDir tmp;
  const std::string path = tmp.file("ds.bin");
  save_dataset(path, sample_dataset());

  std::ifstream is(path, std::ios::binary);
  std::string header;
  REQUIRE(std::getline(is, header));
  std::string blob((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  REQUIRE(blob.size() == 3 * kTransitionRecordBytes);

  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  // state 513 = 0x0201
  CHECK(p[0] == 0x01);
  CHECK(p[1] == 0x02);
  CHECK(p[2] == 7);  // action
  // reward 2.5 = IEEE-754 0x4004000000000000, least significant byte first
  const unsigned char reward_bytes[8] = {0, 0, 0, 0, 0, 0, 0x04, 0x40};
  for (int k = 0; k < 8; ++k) CHECK(p[3 + k] == reward_bytes[k]);
  // next_state 48879 = 0xBEEF
  CHECK(p[11] == 0xEF);
  CHECK(p[12] == 0xBE);
  CHECK(p[13] == 1);  // terminal

  // Second record starts exactly one stride later.
  CHECK(p[kTransitionRecordBytes + 0] == 0);
  CHECK(p[kTransitionRecordBytes + 1] == 0);
  CHECK(p[kTransitionRecordBytes + 13] == 0);
}

TEST_CASE("dataset save/load round trip") {
  TempDir tmp;
  const std::string path = tmp.file("ds.bin");
  const Dataset ds = sample_dataset();
  save_dataset(path, ds);

  const Dataset back = load_dataset(path);
  CHECK(back.grid == ds.grid);
  CHECK(back.seed == ds.seed);
  CHECK(back.augmentations == ds.augmentations);
  CHECK(back.hyperparameters_json == ds.hyperparameters_json);
  CHECK(back.transitions == ds.transitions);
  CHECK(back.audit.empty());

  // Saving the loaded copy reproduces the file byte for byte.
  const std::string path2 = tmp.file("ds2.bin");
  save_dataset(path2, back);
  CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("empty dataset round trips") {
  TempDir tmp;
  const std::string path = tmp.file("empty.bin");
  Dataset ds;
  ds.grid = make_spec(4, 4);
  save_dataset(path, ds);
  const Dataset back = load_dataset(path);
  CHECK(back.transitions.empty());
  CHECK(back.grid == ds.grid);
}

TEST_CASE("dataset loader rejects malformed files") {
  TempDir tmp;

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_dataset(tmp.file("nope.bin")), IoError);
  }
  SUBCASE("wrong version") {
    const std::string path = tmp.file("v0.bin");
    write_file(path, "{\"version\":\"dataset.v0\",\"count\":0}\n");
    CHECK_THROWS_AS(load_dataset(path), IoError);
  }
  SUBCASE("record section truncated") {
    const std::string path = tmp.file("trunc.bin");
    save_dataset(path, sample_dataset());
    std::string bytes = read_file(path);
    write_file(path, bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_AS(load_dataset(path), IoError);
  }
  SUBCASE("trailing garbage") {
    const std::string path = tmp.file("long.bin");
    save_dataset(path, sample_dataset());
    std::string bytes = read_file(path);
    write_file(path, bytes + "x");
    CHECK_THROWS_AS(load_dataset(path), IoError);
  }
}

TEST_CASE("augmentation parsing and composition") {
  CHECK(parse_augmentation("rot90").quarter_turns == 1);
  CHECK(parse_augmentation("rot180").quarter_turns == 2);
  CHECK(parse_augmentation("rot270").quarter_turns == 3);
  CHECK(parse_augmentation("rot90+rot90").quarter_turns == 2);
  CHECK(parse_augmentation("rot90+rot270").quarter_turns == 0);

  const Augmentation s = parse_augmentation("shift:3,-2");
  CHECK(s.quarter_turns == 0);
  CHECK(s.shift_i == 3);
  CHECK(s.shift_j == -2);

  const Augmentation both = parse_augmentation("rot180+shift:1,4");
  CHECK(both.quarter_turns == 2);
  CHECK(both.shift_i == 1);
  CHECK(both.shift_j == 4);

  const Augmentation none = parse_augmentation("");
  CHECK(none.quarter_turns == 0);
  CHECK(none.shift_i == 0);
  CHECK(none.shift_j == 0);

  CHECK_THROWS_AS(parse_augmentation("rot45"), std::invalid_argument);
  CHECK_THROWS_AS(parse_augmentation("shift:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_augmentation("flip"), std::invalid_argument);
}

TEST_CASE("spec transform shifts the origin and guards odd turns") {
  const GridSpec spec = make_spec(6, 6, 0.5, 1.0, -2.0);
  Augmentation aug;
  aug.shift_i = 4;
  aug.shift_j = -2;
  const GridSpec out = transform_spec(spec, aug);
  CHECK(out.origin_x == 3.0);
  CHECK(out.origin_y == -3.0);
  CHECK(out.width == spec.width);
  CHECK(out.cell_size == spec.cell_size);

  const GridSpec rect = make_spec(6, 4);
  Augmentation quarter;
  quarter.quarter_turns = 1;
  CHECK_THROWS_AS(transform_spec(rect, quarter), std::invalid_argument);
  CHECK_THROWS_AS(transform_grid(GridMap<double>(rect), quarter),
                  std::invalid_argument);
  double x = 0, y = 0;
  CHECK_THROWS_AS(transform_point(rect, quarter, x, y), std::invalid_argument);

  // Even turns are fine on rectangles.
  Augmentation half;
  half.quarter_turns = 2;
  CHECK(transform_spec(rect, half) == rect);
}

TEST_CASE("quarter-turn grid rotation hand case") {
  const GridSpec spec = make_spec(2, 2);
  GridMap<double> m(spec);
  m(0, 0) = 1;  // a
  m(1, 0) = 2;  // b
  m(0, 1) = 3;  // c
  m(1, 1) = 4;  // d

  const auto r90 = transform_grid(m, parse_augmentation("rot90"));
  CHECK(r90(0, 0) == 3);
  CHECK(r90(1, 0) == 1);
  CHECK(r90(0, 1) == 4);
  CHECK(r90(1, 1) == 2);

  const auto r180 = transform_grid(m, parse_augmentation("rot180"));
  CHECK(r180(0, 0) == 4);
  CHECK(r180(1, 0) == 3);
  CHECK(r180(0, 1) == 2);
  CHECK(r180(1, 1) == 1);

  const auto r270 = transform_grid(m, parse_augmentation("rot270"));
  CHECK(r270(0, 0) == 2);
  CHECK(r270(1, 0) == 4);
  CHECK(r270(0, 1) == 1);
  CHECK(r270(1, 1) == 3);
}

TEST_CASE("four quarter turns compose to the identity") {
  const GridSpec spec = make_spec(5, 5, 0.5, -1.0, 3.0);
  Rng rng(31337);
  GridMap<double> m(spec);
  for (double& v : m.cells()) v = rng.uniform();

  GridMap<double> cur = m;
  for (int k = 0; k < 4; ++k) cur = transform_grid(cur, parse_augmentation("rot90"));
  CHECK(cur == m);

  GridMap<double> twice = transform_grid(
      transform_grid(m, parse_augmentation("rot180")), parse_augmentation("rot180"));
  CHECK(twice == m);
}

TEST_CASE("pure shift moves content with the origin") {
  const GridSpec spec = make_spec(4, 3, 2.0);
  Rng rng(99);
  GridMap<double> m(spec);
  for (double& v : m.cells()) v = rng.uniform();

  const Augmentation aug = parse_augmentation("shift:2,-1");
  const auto out = transform_grid(m, aug);
  // Same cell indices hold the same values; only the origin moved.
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 4; ++i) CHECK(out(i, j) == m(i, j));
  CHECK(out.spec().origin_x == 4.0);
  CHECK(out.spec().origin_y == -2.0);

  // A world point moves by the same offset.
  double x = 1.3, y = 2.6;
  transform_point(spec, aug, x, y);
  CHECK(x == doctest::Approx(1.3 + 4.0).epsilon(1e-15));
  CHECK(y == doctest::Approx(2.6 - 2.0).epsilon(1e-15));
}

TEST_CASE("point transform hand cases and heading shift") {
  const GridSpec spec = make_spec(4, 4);
  double x = 1.25, y = 0.5;
  transform_point(spec, parse_augmentation("rot90"), x, y);
  CHECK(x == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(y == doctest::Approx(1.25).epsilon(1e-15));

  double px = 1.0, py = 1.0, heading = M_PI;
  transform_pose(spec, parse_augmentation("rot90"), px, py, heading);
  CHECK(px == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(py == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(heading == doctest::Approx(-M_PI / 2).epsilon(1e-12));

  // Rotating a pose four times restores it.
  double qx = 0.75, qy = 2.25, qh = 0.4;
  for (int k = 0; k < 4; ++k)
    transform_pose(spec, parse_augmentation("rot90"), qx, qy, qh);
  CHECK(qx == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(qy == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(qh == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("grid and point transforms agree cell by cell") {
  // The value found at a transformed cell center equals the original cell's
  // value, for every combination of rotation and shift.
  const char* augs[] = {"rot90",          "rot180",       "rot270",
                        "shift:3,-1",     "rot90+shift:2,5", "rot270+shift:-2,0",
                        "rot180+shift:0,7"};
  Rng rng(2024);
  for (const char* text : augs) {
    const Augmentation aug = parse_augmentation(text);
    const GridSpec spec = make_spec(7, 7, 0.5, -2.0, 1.0);
    GridMap<double> m(spec);
    for (double& v : m.cells()) v = rng.uniform();
    const auto out = transform_grid(m, aug);

    for (int j = 0; j < spec.height; ++j)
      for (int i = 0; i < spec.width; ++i) {
        double x = spec.center_x(i), y = spec.center_y(j);
        transform_point(spec, aug, x, y);
        const auto cell = project_point(out.spec(), x, y);
        REQUIRE(cell.has_value());
        CHECK(out(*cell) == m(i, j));
      }
  }
}
