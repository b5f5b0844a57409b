#pragma once

#include "covnav/grid.hpp"

namespace covnav {

// Compact discrete state for the tabular policy: local cover and threat
// levels, local obstacle presence, and goal range/bearing buckets.
struct StateFeatures {
  int cover_bucket = 0;        // 0..4, local mean cover density
  int threat_bucket = 0;       // 0..4, local mean threat score
  bool height_blocked = false; // any local cell above the safe height
  int goal_dist_bucket = 0;    // 0..7, log-spaced range rings
  int goal_bearing_bucket = 0; // 0..7, pi/4 sectors of relative bearing

  bool operator==(const StateFeatures&) const = default;
};

inline constexpr int kNumStates = 5 * 5 * 2 * 8 * 8;  // 3200

int state_index(const StateFeatures& f);
StateFeatures features_from_index(int index);

// Features at a world pose. The local window is the 3x3 cell neighbourhood
// of the robot's cell, clipped at grid borders. The pose must project inside
// the grid (std::invalid_argument otherwise).
StateFeatures extract_features(const CoverMap& cover, const ThreatMap& threat,
                               const HeightMap& height, const GoalMap& goal,
                               double x, double y, double heading,
                               double max_safe_height);

}  // namespace covnav
