#include "covnav/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace covnav {

namespace {

// Threat scores shrink as the belief spreads over more cells, so absolute
// thresholds would collapse to one bucket on large grids.  Quantize the local
// mean relative to the strongest cell on the current map instead; an all-zero
// map (e.g. the threat channel disabled) lands in bucket 0.
constexpr double kThreatEdges[4] = {0.1, 0.25, 0.45, 0.7};
// Range rings double per bucket.
constexpr double kDistEdges[7] = {1, 2, 4, 8, 16, 32, 64};

int threat_bucket_of(double mean, double peak) {
  if (peak <= 0.0) return 0;
  const double ratio = mean / peak;
  int b = 0;
  while (b < 4 && ratio >= kThreatEdges[b]) ++b;
  return b;
}

int dist_bucket_of(double d) {
  int b = 0;
  while (b < 7 && d >= kDistEdges[b]) ++b;
  return b;
}

}  // namespace

int state_index(const StateFeatures& f) {
  if (f.cover_bucket < 0 || f.cover_bucket > 4 || f.threat_bucket < 0 ||
      f.threat_bucket > 4 || f.goal_dist_bucket < 0 || f.goal_dist_bucket > 7 ||
      f.goal_bearing_bucket < 0 || f.goal_bearing_bucket > 7)
    throw std::out_of_range("state feature out of range");
  return (((f.cover_bucket * 5 + f.threat_bucket) * 2 +
           (f.height_blocked ? 1 : 0)) *
              8 +
          f.goal_dist_bucket) *
             8 +
         f.goal_bearing_bucket;
}

StateFeatures features_from_index(int index) {
  if (index < 0 || index >= kNumStates)
    throw std::out_of_range("state index out of range");
  StateFeatures f;
  f.goal_bearing_bucket = index % 8;
  index /= 8;
  f.goal_dist_bucket = index % 8;
  index /= 8;
  f.height_blocked = (index % 2) != 0;
  index /= 2;
  f.threat_bucket = index % 5;
  index /= 5;
  f.cover_bucket = index;
  return f;
}

StateFeatures extract_features(const CoverMap& cover, const ThreatMap& threat,
                               const HeightMap& height, const GoalMap& goal,
                               double x, double y, double heading,
                               double max_safe_height) {
  const GridSpec& spec = cover.spec();
  const auto cell = project_point(spec, x, y);
  if (!cell) throw std::invalid_argument("extract_features: pose off-grid");

  double cover_sum = 0.0, threat_sum = 0.0;
  int n = 0;
  bool blocked = false;
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      const int i = cell->i + di, j = cell->j + dj;
      if (!spec.contains(i, j)) continue;
      cover_sum += cover(i, j);
      threat_sum += threat(i, j);
      if (height(i, j) > max_safe_height) blocked = true;
      ++n;
    }
  double threat_peak = 0.0;
  for (double v : threat.cells()) threat_peak = std::max(threat_peak, v);

  StateFeatures f;
  f.cover_bucket = std::min(4, static_cast<int>(std::floor(cover_sum / n * 5.0)));
  f.threat_bucket = threat_bucket_of(threat_sum / n, threat_peak);
  f.height_blocked = blocked;

  const double d = std::hypot(x - goal.goal_x, y - goal.goal_y);
  f.goal_dist_bucket = dist_bucket_of(d);

  const double bearing = std::atan2(goal.goal_y - y, goal.goal_x - x);
  const double rel = wrap_angle(bearing - heading);
  f.goal_bearing_bucket =
      std::min(7, static_cast<int>(std::floor((rel + M_PI) / (M_PI / 4.0))));
  return f;
}

}  // namespace covnav
