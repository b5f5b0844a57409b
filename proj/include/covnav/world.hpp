#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covnav/geometry.hpp"

namespace covnav {

struct PointCloud {
  std::vector<Vec3> points;
};

enum class ObjectKind { tree, bush, wall, building, rock };

const char* to_string(ObjectKind k);
ObjectKind object_kind_from_string(const std::string& s);

// Axis-aligned box footprint sitting on the ground plane.
struct PlacedObject {
  ObjectKind kind = ObjectKind::rock;
  double x = 0.0;  // footprint min corner
  double y = 0.0;
  double size_x = 1.0;
  double size_y = 1.0;
  double height = 1.0;
  double point_density = 50.0;  // points per cubic meter
};

enum class Scenario { urban, forest, mixed };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct World {
  double extent_x = 50.0;
  double extent_y = 50.0;
  double ground_z = 0.0;
  double ground_wave_amp = 0.0;  // sinusoidal ground undulation amplitude
  std::uint64_t seed = 0;
  std::vector<PlacedObject> objects;
};

// Places a scenario-dependent object mix inside the extent. Object class
// fractions are fixed per scenario (counts scale with area), so mix bounds
// hold on every seed by construction. Throws std::invalid_argument if either
// extent is below 10 m.
World generate_world(Scenario scenario, double extent_x, double extent_y,
                     std::uint64_t seed);

// Ground height (undulation only; ground_z offset already applied).
double ground_height(const World& world, double x, double y);

// Samples object interiors at each object's point density (Poisson counts)
// plus the ground plane at a fixed 2 points/m^2, then perturbs every point
// with isotropic Gaussian noise of the given sigma. Deterministic in (world,
// seed).
PointCloud sample_point_cloud(const World& world, double noise_sigma,
                              std::uint64_t seed);

// JSON object format, version "world.v1".
std::string world_to_json(const World& world);
World world_from_json(const std::string& text);
void save_world(const std::string& path, const World& world);
World load_world(const std::string& path);

// Plain text, one "x y z" triple per line, %.9g.
void save_point_cloud(const std::string& path, const PointCloud& cloud);
PointCloud load_point_cloud(const std::string& path);

}  // namespace covnav
