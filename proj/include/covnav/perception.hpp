#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "covnav/world.hpp"

namespace covnav {

struct PerceptionParams {
  double ground_band = 0.15;   // points below this z are discarded as ground
  double link_radius = 0.6;    // max hop distance within a cluster, meters
  int min_points = 8;          // clusters smaller than this are dropped
  double min_height = 0.5;     // h threshold for cover classification
  double min_density = 5.0;    // points per m^3 threshold
  double min_volume = 0.1;     // bounding-box volume threshold, m^3
};

struct Cluster {
  std::vector<std::uint32_t> point_indices;  // sorted ascending
  Vec3 bbox_min;
  Vec3 bbox_max;
};

struct ClusterStats {
  double height = 0.0;   // max z - min z
  double volume = 0.0;   // bbox dx * dy * height
  double density = std::numeric_limits<double>::infinity();  // points / volume
  bool is_cover = false;
};

// Single-link clustering: points are in the same cluster iff connected by a
// chain of hops each <= link_radius (Euclidean, 3D). Ground-band points are
// removed first; clusters below min_points are dropped. Output order and
// point order are deterministic (clusters sorted by smallest point index).
std::vector<Cluster> euclidean_cluster(const PointCloud& cloud,
                                       const PerceptionParams& params);

// Height/volume/density occupancy statistics and the cover decision
// h >= min_height && density >= min_density && volume >= min_volume.
// A degenerate (zero-volume) cluster gets density = +inf, so the decision
// reduces to the height and volume criteria.
ClusterStats cluster_stats(const PointCloud& cloud, const Cluster& cluster,
                           const PerceptionParams& params);

// Indices (into cloud.points, sorted ascending) of all points belonging to
// clusters classified as cover.
std::vector<std::uint32_t> cover_points(const PointCloud& cloud,
                                        const std::vector<Cluster>& clusters,
                                        const PerceptionParams& params);

// "x y z label" per point: cluster index, or -1 for ground/unclustered points.
void save_cluster_labels(const std::string& path, const PointCloud& cloud,
                         const std::vector<Cluster>& clusters);

}  // namespace covnav
