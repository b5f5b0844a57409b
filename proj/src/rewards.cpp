#include "covnav/rewards.hpp"

namespace covnav {

double reward_cover(const CoverMap& cover, const std::vector<CellIndex>& swept,
                    double lambda) {
  double sum = 0.0;
  for (CellIndex c : swept) sum += cover(c);
  return lambda * sum;
}

double reward_threat(const ThreatMap& threat,
                     const std::vector<CellIndex>& occupied, double lambda) {
  double sum = 0.0;
  for (CellIndex c : occupied) sum += threat(c);
  return -lambda * sum;
}

double reward_goal(double dist_prev, double dist_next, double lambda) {
  return lambda * (dist_prev - dist_next);
}

double reward_collision(const HeightMap& height,
                        const std::vector<CellIndex>& swept, double lambda,
                        double max_safe_height) {
  for (CellIndex c : swept)
    if (height(c) > max_safe_height) return -lambda;
  return 0.0;
}

RewardBreakdown total_reward(const CoverMap& cover_map,
                             const ThreatMap& threat_map,
                             const HeightMap& height_map,
                             const std::vector<CellIndex>& swept,
                             const std::vector<CellIndex>& occupied,
                             double dist_prev, double dist_next,
                             const RewardWeights& weights) {
  RewardBreakdown r;
  r.cover = reward_cover(cover_map, swept, weights.cover);
  r.threat = reward_threat(threat_map, occupied, weights.threat);
  r.goal = reward_goal(dist_prev, dist_next, weights.goal);
  r.collision = reward_collision(height_map, swept, weights.collision,
                                 weights.max_safe_height);
  return r;
}

}  // namespace covnav
