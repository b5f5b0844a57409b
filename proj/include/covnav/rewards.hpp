#pragma once

#include <vector>

#include "covnav/grid.hpp"

namespace covnav {

struct RewardWeights {
  double cover = 1.0;      // per-cell cover credit along the swept footprint
  double threat = 2.0;     // penalty on the occupied cell's threat score
  double goal = 5.0;       // per-meter progress toward the goal
  double collision = 10.0; // flat penalty if the footprint clips an obstacle
  double max_safe_height = 0.3;  // obstacle threshold, strictly above
};

// Sum of cover densities over the swept cells, scaled by lambda.
double reward_cover(const CoverMap& cover, const std::vector<CellIndex>& swept,
                    double lambda);

// Negative sum of threat scores over the occupied cells, scaled by lambda.
double reward_threat(const ThreatMap& threat,
                     const std::vector<CellIndex>& occupied, double lambda);

// lambda * (previous distance - next distance): positive when approaching.
double reward_goal(double dist_prev, double dist_next, double lambda);

// -lambda iff any swept cell is strictly taller than max_safe_height, else 0.
double reward_collision(const HeightMap& height,
                        const std::vector<CellIndex>& swept, double lambda,
                        double max_safe_height);

struct RewardBreakdown {
  double cover = 0.0;
  double threat = 0.0;
  double goal = 0.0;
  double collision = 0.0;
  double total() const { return cover + threat + goal + collision; }
};

// All four terms for one transition: `swept` is the motion footprint of the
// step, `occupied` the cell(s) occupied at the pre-step state.
RewardBreakdown total_reward(const CoverMap& cover_map,
                             const ThreatMap& threat_map,
                             const HeightMap& height_map,
                             const std::vector<CellIndex>& swept,
                             const std::vector<CellIndex>& occupied,
                             double dist_prev, double dist_next,
                             const RewardWeights& weights);

}  // namespace covnav
