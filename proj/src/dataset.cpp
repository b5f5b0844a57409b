#include "covnav/dataset.hpp"
#include "covnav/errors.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace covnav {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void put_u16(std::string& buf, std::uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xFF));
  buf.push_back(static_cast<char>(v >> 8));
}

void put_f64(std::string& buf, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int k = 0; k < 8; ++k)
    buf.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& dataset) {
  ordered_json header;
  header["version"] = "dataset.v1";
  header["count"] = dataset.transitions.size();
  header["grid"] = {{"width", dataset.grid.width},
                    {"height", dataset.grid.height},
                    {"cell_size", dataset.grid.cell_size},
                    {"origin_x", dataset.grid.origin_x},
                    {"origin_y", dataset.grid.origin_y}};
  header["seed"] = dataset.seed;
  header["augmentations"] = dataset.augmentations;
  header["hyperparameters"] = json::parse(dataset.hyperparameters_json);

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path);
  os << header.dump() << '\n';

  std::string buf;
  buf.reserve(dataset.transitions.size() * kTransitionRecordBytes);
  for (const Transition& t : dataset.transitions) {
    put_u16(buf, t.state);
    buf.push_back(static_cast<char>(t.action));
    put_f64(buf, t.reward);
    put_u16(buf, t.next_state);
    buf.push_back(static_cast<char>(t.terminal));
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw IoError("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  std::string header_line;
  if (!std::getline(is, header_line))
    throw IoError("dataset: missing header: " + path);
  json header = json::parse(header_line);
  if (!header.contains("version") || header["version"] != "dataset.v1")
    throw IoError("dataset: unsupported version");

  Dataset out;
  out.grid.width = header.at("grid").at("width").get<int>();
  out.grid.height = header.at("grid").at("height").get<int>();
  out.grid.cell_size = header.at("grid").at("cell_size").get<double>();
  out.grid.origin_x = header.at("grid").at("origin_x").get<double>();
  out.grid.origin_y = header.at("grid").at("origin_y").get<double>();
  out.seed = header.at("seed").get<std::uint64_t>();
  out.augmentations =
      header.at("augmentations").get<std::vector<std::string>>();
  out.hyperparameters_json = header.at("hyperparameters").dump();

  const std::size_t count = header.at("count").get<std::size_t>();
  std::string blob((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  if (blob.size() != count * kTransitionRecordBytes)
    throw IoError("dataset: record section size mismatch");
  out.transitions.reserve(count);
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  for (std::size_t k = 0; k < count; ++k, p += kTransitionRecordBytes) {
    Transition t;
    t.state = get_u16(p);
    t.action = p[2];
    t.reward = get_f64(p + 3);
    t.next_state = get_u16(p + 11);
    t.terminal = p[13];
    out.transitions.push_back(t);
  }
  return out;
}

Augmentation parse_augmentation(const std::string& text) {
  Augmentation aug;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (part == "rot90")
      aug.quarter_turns = (aug.quarter_turns + 1) % 4;
    else if (part == "rot180")
      aug.quarter_turns = (aug.quarter_turns + 2) % 4;
    else if (part == "rot270")
      aug.quarter_turns = (aug.quarter_turns + 3) % 4;
    else if (part.rfind("shift:", 0) == 0) {
      int di = 0, dj = 0;
      if (std::sscanf(part.c_str() + 6, "%d,%d", &di, &dj) != 2)
        throw std::invalid_argument("bad augmentation shift: " + part);
      aug.shift_i += di;
      aug.shift_j += dj;
    } else {
      throw std::invalid_argument("unknown augmentation: " + part);
    }
  }
  return aug;
}

GridSpec transform_spec(const GridSpec& spec, const Augmentation& aug) {
  if (aug.quarter_turns % 2 == 1 && spec.width != spec.height)
    throw std::invalid_argument("quarter-turn rotation needs a square grid");
  GridSpec out = spec;
  out.origin_x = spec.origin_x + aug.shift_i * spec.cell_size;
  out.origin_y = spec.origin_y + aug.shift_j * spec.cell_size;
  return out;
}

GridMap<double> transform_grid(const GridMap<double>& map,
                               const Augmentation& aug) {
  const GridSpec src = map.spec();
  const GridSpec dst = transform_spec(src, aug);
  GridMap<double> out(dst);
  const int w = src.width, h = src.height;
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      int ti = i, tj = j;
      switch (aug.quarter_turns) {
        case 0: break;
        case 1: ti = w - 1 - j; tj = i; break;
        case 2: ti = w - 1 - i; tj = h - 1 - j; break;
        case 3: ti = j; tj = h - 1 - i; break;
      }
      out(ti, tj) = map(i, j);
    }
  return out;
}

void transform_point(const GridSpec& spec, const Augmentation& aug, double& x,
                     double& y) {
  if (aug.quarter_turns % 2 == 1 && spec.width != spec.height)
    throw std::invalid_argument("quarter-turn rotation needs a square grid");
  const double ex = spec.width * spec.cell_size;
  const double ey = spec.height * spec.cell_size;
  double u = x - spec.origin_x;
  double v = y - spec.origin_y;
  double nu = u, nv = v;
  switch (aug.quarter_turns) {
    case 0: break;
    case 1: nu = ex - v; nv = u; break;
    case 2: nu = ex - u; nv = ey - v; break;
    case 3: nu = v; nv = ey - u; break;
  }
  const GridSpec dst = transform_spec(spec, aug);
  x = dst.origin_x + nu;
  y = dst.origin_y + nv;
}

void transform_pose(const GridSpec& spec, const Augmentation& aug, double& x,
                    double& y, double& heading) {
  transform_point(spec, aug, x, y);
  heading = wrap_angle(heading + aug.quarter_turns * (M_PI / 2.0));
}

}  // namespace covnav
