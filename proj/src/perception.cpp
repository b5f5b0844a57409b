#include "covnav/perception.hpp"
#include "covnav/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace covnav {

namespace {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t k = 0; k < n; ++k) parent[k] = static_cast<std::uint32_t>(k);
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

struct HashKey {
  int x, y, z;
  bool operator==(const HashKey&) const = default;
};

struct HashKeyHash {
  std::size_t operator()(const HashKey& k) const {
    std::size_t h = static_cast<std::size_t>(k.x) * 73856093u;
    h ^= static_cast<std::size_t>(k.y) * 19349663u;
    h ^= static_cast<std::size_t>(k.z) * 83492791u;
    return h;
  }
};

}  // namespace

std::vector<Cluster> euclidean_cluster(const PointCloud& cloud,
                                       const PerceptionParams& params) {
  if (params.link_radius <= 0.0)
    throw std::invalid_argument("link_radius must be positive");

  // Non-ground point subset.
  std::vector<std::uint32_t> keep;
  keep.reserve(cloud.points.size());
  for (std::uint32_t k = 0; k < cloud.points.size(); ++k)
    if (cloud.points[k].z >= params.ground_band) keep.push_back(k);

  // Spatial hash with bucket edge = link_radius; neighbors live in the
  // 27 surrounding buckets.
  const double inv = 1.0 / params.link_radius;
  std::unordered_map<HashKey, std::vector<std::uint32_t>, HashKeyHash> buckets;
  buckets.reserve(keep.size());
  auto key_of = [&](const Vec3& p) {
    return HashKey{static_cast<int>(std::floor(p.x * inv)),
                   static_cast<int>(std::floor(p.y * inv)),
                   static_cast<int>(std::floor(p.z * inv))};
  };
  for (std::uint32_t local = 0; local < keep.size(); ++local)
    buckets[key_of(cloud.points[keep[local]])].push_back(local);

  UnionFind uf(keep.size());
  const double r2 = params.link_radius * params.link_radius;
  for (std::uint32_t local = 0; local < keep.size(); ++local) {
    const Vec3& p = cloud.points[keep[local]];
    const HashKey base = key_of(p);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = buckets.find({base.x + dx, base.y + dy, base.z + dz});
          if (it == buckets.end()) continue;
          for (std::uint32_t other : it->second) {
            if (other <= local) continue;
            const Vec3& q = cloud.points[keep[other]];
            const double d2 = sq(p.x - q.x) + sq(p.y - q.y) + sq(p.z - q.z);
            if (d2 <= r2) uf.unite(local, other);
          }
        }
  }

  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> groups;
  for (std::uint32_t local = 0; local < keep.size(); ++local)
    groups[uf.find(local)].push_back(keep[local]);

  std::vector<Cluster> clusters;
  for (auto& [root, indices] : groups) {
    if (static_cast<int>(indices.size()) < params.min_points) continue;
    Cluster c;
    std::sort(indices.begin(), indices.end());
    c.point_indices = std::move(indices);
    c.bbox_min = {std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
    c.bbox_max = {-std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
    for (std::uint32_t idx : c.point_indices) {
      const Vec3& p = cloud.points[idx];
      c.bbox_min.x = std::min(c.bbox_min.x, p.x);
      c.bbox_min.y = std::min(c.bbox_min.y, p.y);
      c.bbox_min.z = std::min(c.bbox_min.z, p.z);
      c.bbox_max.x = std::max(c.bbox_max.x, p.x);
      c.bbox_max.y = std::max(c.bbox_max.y, p.y);
      c.bbox_max.z = std::max(c.bbox_max.z, p.z);
    }
    clusters.push_back(std::move(c));
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) {
              return a.point_indices.front() < b.point_indices.front();
            });
  return clusters;
}

ClusterStats cluster_stats(const PointCloud& cloud, const Cluster& cluster,
                           const PerceptionParams& params) {
  if (cluster.point_indices.empty())
    throw std::invalid_argument("cluster_stats: empty cluster");
  (void)cloud;
  ClusterStats s;
  s.height = cluster.bbox_max.z - cluster.bbox_min.z;
  const double dx = cluster.bbox_max.x - cluster.bbox_min.x;
  const double dy = cluster.bbox_max.y - cluster.bbox_min.y;
  s.volume = dx * dy * s.height;
  s.density = (s.volume > 0.0)
                  ? static_cast<double>(cluster.point_indices.size()) / s.volume
                  : std::numeric_limits<double>::infinity();
  s.is_cover = s.height >= params.min_height && s.density >= params.min_density &&
               s.volume >= params.min_volume;
  return s;
}

std::vector<std::uint32_t> cover_points(const PointCloud& cloud,
                                        const std::vector<Cluster>& clusters,
                                        const PerceptionParams& params) {
  std::vector<std::uint32_t> out;
  for (const Cluster& c : clusters) {
    if (!cluster_stats(cloud, c, params).is_cover) continue;
    out.insert(out.end(), c.point_indices.begin(), c.point_indices.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void save_cluster_labels(const std::string& path, const PointCloud& cloud,
                         const std::vector<Cluster>& clusters) {
  std::vector<int> label(cloud.points.size(), -1);
  for (std::size_t k = 0; k < clusters.size(); ++k)
    for (std::uint32_t idx : clusters[k].point_indices)
      label[idx] = static_cast<int>(k);
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for write: " + path);
  char buf[160];
  for (std::size_t k = 0; k < cloud.points.size(); ++k) {
    const Vec3& p = cloud.points[k];
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %d\n", p.x, p.y, p.z,
                  label[k]);
    os << buf;
  }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace covnav
