#include "covnav/world.hpp"
#include "covnav/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "covnav/rng.hpp"

namespace covnav {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct KindRange {
  double size_lo, size_hi;      // footprint edge, meters
  double height_lo, height_hi;  // meters
  double density_lo, density_hi;  // points per m^3
  bool elongated;               // walls: one long axis, one thin axis
};

KindRange kind_range(ObjectKind k) {
  switch (k) {
    case ObjectKind::tree:     return {0.8, 2.0, 2.5, 6.0, 50.0, 90.0, false};
    case ObjectKind::bush:     return {0.8, 1.6, 0.6, 1.2, 80.0, 150.0, false};
    case ObjectKind::wall:     return {4.0, 10.0, 2.0, 3.0, 120.0, 200.0, true};
    case ObjectKind::building: return {3.0, 8.0, 3.0, 8.0, 12.0, 18.0, false};
    case ObjectKind::rock:     return {0.4, 1.2, 0.3, 0.9, 100.0, 200.0, false};
  }
  throw std::logic_error("unknown object kind");
}

// Per-scenario object counts for a reference 2500 m^2 area. Fractions are
// fixed so the class mix is guaranteed on every seed:
//   urban:  structural 15/20 = 75%, vegetation 15%, rock 10%
//   forest: vegetation 30/36 ~ 83%, structural ~6%, rock ~11%
//   mixed:  structural ~41%, vegetation 50%, rock ~9% (neither class > 60%)
struct MixEntry {
  ObjectKind kind;
  int count;
};

std::vector<MixEntry> scenario_mix(Scenario s) {
  switch (s) {
    case Scenario::urban:
      return {{ObjectKind::building, 3}, {ObjectKind::wall, 12},
              {ObjectKind::tree, 2},     {ObjectKind::bush, 1},
              {ObjectKind::rock, 2}};
    case Scenario::forest:
      return {{ObjectKind::tree, 22}, {ObjectKind::bush, 8},
              {ObjectKind::wall, 2},  {ObjectKind::rock, 4}};
    case Scenario::mixed:
      return {{ObjectKind::building, 2}, {ObjectKind::wall, 7},
              {ObjectKind::tree, 8},     {ObjectKind::bush, 3},
              {ObjectKind::rock, 2}};
  }
  throw std::logic_error("unknown scenario");
}

constexpr double kGroundPointsPerM2 = 2.0;
constexpr double kGroundWaveAmp = 0.08;

}  // namespace

const char* to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::tree: return "tree";
    case ObjectKind::bush: return "bush";
    case ObjectKind::wall: return "wall";
    case ObjectKind::building: return "building";
    case ObjectKind::rock: return "rock";
  }
  return "?";
}

ObjectKind object_kind_from_string(const std::string& s) {
  if (s == "tree") return ObjectKind::tree;
  if (s == "bush") return ObjectKind::bush;
  if (s == "wall") return ObjectKind::wall;
  if (s == "building") return ObjectKind::building;
  if (s == "rock") return ObjectKind::rock;
  throw std::invalid_argument("unknown object kind: " + s);
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::urban: return "urban";
    case Scenario::forest: return "forest";
    case Scenario::mixed: return "mixed";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "urban") return Scenario::urban;
  if (s == "forest") return Scenario::forest;
  if (s == "mixed") return Scenario::mixed;
  throw std::invalid_argument("unknown scenario: " + s);
}

World generate_world(Scenario scenario, double extent_x, double extent_y,
                     std::uint64_t seed) {
  if (extent_x < 10.0 || extent_y < 10.0)
    throw std::invalid_argument("world extent must be at least 10 m per axis");

  World world;
  world.extent_x = extent_x;
  world.extent_y = extent_y;
  world.seed = seed;
  world.ground_wave_amp = (scenario == Scenario::urban) ? 0.0 : kGroundWaveAmp;

  Rng rng(derive_seed(seed, 0xE0));
  const double area_scale = (extent_x * extent_y) / 2500.0;
  for (const MixEntry& entry : scenario_mix(scenario)) {
    const int n = std::max(1, static_cast<int>(std::lround(entry.count * area_scale)));
    const KindRange r = kind_range(entry.kind);
    for (int k = 0; k < n; ++k) {
      PlacedObject obj;
      obj.kind = entry.kind;
      if (r.elongated) {
        const double len = rng.uniform(r.size_lo, r.size_hi);
        const double thick = rng.uniform(0.2, 0.4);
        if (rng.bernoulli(0.5)) {
          obj.size_x = len;
          obj.size_y = thick;
        } else {
          obj.size_x = thick;
          obj.size_y = len;
        }
      } else {
        obj.size_x = rng.uniform(r.size_lo, r.size_hi);
        obj.size_y = rng.uniform(r.size_lo, r.size_hi);
      }
      obj.height = rng.uniform(r.height_lo, r.height_hi);
      obj.point_density = rng.uniform(r.density_lo, r.density_hi);
      // Keep the footprint fully inside the extent.
      obj.x = rng.uniform(0.0, extent_x - obj.size_x);
      obj.y = rng.uniform(0.0, extent_y - obj.size_y);
      world.objects.push_back(obj);
    }
  }
  return world;
}

double ground_height(const World& world, double x, double y) {
  if (world.ground_wave_amp == 0.0) return world.ground_z;
  return world.ground_z + world.ground_wave_amp * std::sin(2.0 * M_PI * x / 17.0) *
                              std::cos(2.0 * M_PI * y / 13.0);
}

PointCloud sample_point_cloud(const World& world, double noise_sigma,
                              std::uint64_t seed) {
  if (noise_sigma < 0.0)
    throw std::invalid_argument("noise_sigma must be non-negative");
  PointCloud cloud;
  Rng rng(derive_seed(seed, 0xC1));

  const int ground_n =
      rng.poisson(kGroundPointsPerM2 * world.extent_x * world.extent_y);
  for (int k = 0; k < ground_n; ++k) {
    const double x = rng.uniform(0.0, world.extent_x);
    const double y = rng.uniform(0.0, world.extent_y);
    Vec3 p{x, y, ground_height(world, x, y)};
    if (noise_sigma > 0.0) {
      p.x += rng.normal(0.0, noise_sigma);
      p.y += rng.normal(0.0, noise_sigma);
      p.z += rng.normal(0.0, noise_sigma);
    }
    cloud.points.push_back(p);
  }

  for (const PlacedObject& obj : world.objects) {
    const double volume = obj.size_x * obj.size_y * obj.height;
    const int n = rng.poisson(obj.point_density * volume);
    for (int k = 0; k < n; ++k) {
      Vec3 p{obj.x + rng.uniform(0.0, obj.size_x),
             obj.y + rng.uniform(0.0, obj.size_y),
             world.ground_z + rng.uniform(0.0, obj.height)};
      if (noise_sigma > 0.0) {
        p.x += rng.normal(0.0, noise_sigma);
        p.y += rng.normal(0.0, noise_sigma);
        p.z += rng.normal(0.0, noise_sigma);
      }
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

std::string world_to_json(const World& world) {
  ordered_json j;
  j["version"] = "world.v1";
  j["extent_x"] = world.extent_x;
  j["extent_y"] = world.extent_y;
  j["ground_z"] = world.ground_z;
  j["ground_wave_amp"] = world.ground_wave_amp;
  j["seed"] = world.seed;
  j["objects"] = ordered_json::array();
  for (const PlacedObject& o : world.objects) {
    ordered_json jo;
    jo["kind"] = to_string(o.kind);
    jo["x"] = o.x;
    jo["y"] = o.y;
    jo["size_x"] = o.size_x;
    jo["size_y"] = o.size_y;
    jo["height"] = o.height;
    jo["point_density"] = o.point_density;
    j["objects"].push_back(jo);
  }
  return j.dump(2) + "\n";
}

World world_from_json(const std::string& text) {
  json j = json::parse(text);
  if (!j.contains("version") || j["version"] != "world.v1")
    throw IoError("world file: unsupported version");
  World world;
  world.extent_x = j.at("extent_x").get<double>();
  world.extent_y = j.at("extent_y").get<double>();
  world.ground_z = j.at("ground_z").get<double>();
  world.ground_wave_amp = j.value("ground_wave_amp", 0.0);
  world.seed = j.at("seed").get<std::uint64_t>();
  for (const json& jo : j.at("objects")) {
    PlacedObject o;
    o.kind = object_kind_from_string(jo.at("kind").get<std::string>());
    o.x = jo.at("x").get<double>();
    o.y = jo.at("y").get<double>();
    o.size_x = jo.at("size_x").get<double>();
    o.size_y = jo.at("size_y").get<double>();
    o.height = jo.at("height").get<double>();
    o.point_density = jo.at("point_density").get<double>();
    world.objects.push_back(o);
  }
  return world;
}

void save_world(const std::string& path, const World& world) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for write: " + path);
  os << world_to_json(world);
  if (!os) throw IoError("write failed: " + path);
}

World load_world(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return world_from_json(ss.str());
}

void save_point_cloud(const std::string& path, const PointCloud& cloud) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for write: " + path);
  char buf[128];
  for (const Vec3& p : cloud.points) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x, p.y, p.z);
    os << buf;
  }
  if (!os) throw IoError("write failed: " + path);
}

PointCloud load_point_cloud(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  PointCloud cloud;
  Vec3 p;
  while (is >> p.x >> p.y >> p.z) cloud.points.push_back(p);
  if (!is.eof() && is.fail())
    throw IoError("point cloud: malformed line in " + path);
  return cloud;
}

}  // namespace covnav
