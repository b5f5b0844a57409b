#include <doctest.h>

#include <vector>

#include "covnav/rewards.hpp"

using namespace covnav;

namespace {

GridSpec make_spec(int w, int h) {
  GridSpec s;
  s.width = w;
  s.height = h;
  return s;
}

}  // namespace

TEST_CASE("cover reward sums swept-cell densities") {
  CoverMap cover(make_spec(4, 4), 0.0);
  cover(0, 0) = 0.5;
  cover(1, 0) = 0.25;
  cover(1, 1) = 1.0;

  CHECK(reward_cover(cover, {{0, 0}, {1, 0}, {1, 1}}, 1.0) == 1.75);
  CHECK(reward_cover(cover, {{0, 0}, {1, 0}, {1, 1}}, 2.0) == 3.5);
  CHECK(reward_cover(cover, {{3, 3}}, 1.0) == 0.0);
  CHECK(reward_cover(cover, {}, 1.0) == 0.0);
  // A cell listed twice is credited twice; dedup is the caller's job.
  CHECK(reward_cover(cover, {{0, 0}, {0, 0}}, 1.0) == 1.0);
}

TEST_CASE("threat reward is the negative sum over occupied cells") {
  ThreatMap threat(make_spec(3, 3), 0.0);
  threat(1, 1) = 0.4;
  threat(2, 1) = 0.1;

  CHECK(reward_threat(threat, {{1, 1}}, 2.0) == -0.8);
  CHECK(reward_threat(threat, {{1, 1}, {2, 1}}, 2.0) == -1.0);
  CHECK(reward_threat(threat, {{0, 0}}, 2.0) == 0.0);
  CHECK(reward_threat(threat, {}, 2.0) == 0.0);
  CHECK(reward_threat(threat, {{1, 1}}, 0.0) == 0.0);
}

TEST_CASE("goal reward tracks signed progress") {
  CHECK(reward_goal(10.0, 9.0, 5.0) == 5.0);    // approaching
  CHECK(reward_goal(9.0, 10.0, 5.0) == -5.0);   // retreating
  CHECK(reward_goal(7.5, 7.5, 5.0) == 0.0);     // holding
  CHECK(reward_goal(10.0, 9.75, 4.0) == 1.0);   // fractional progress
}

TEST_CASE("collision penalty requires a strictly taller cell") {
  HeightMap height(make_spec(4, 1), 0.0);
  height(1, 0) = 0.3;   // exactly at the threshold: passable
  height(2, 0) = 0.31;  // strictly above: obstacle

  CHECK(reward_collision(height, {{0, 0}, {1, 0}}, 10.0, 0.3) == 0.0);
  CHECK(reward_collision(height, {{0, 0}, {2, 0}}, 10.0, 0.3) == -10.0);
  // Flat penalty, not per cell.
  CHECK(reward_collision(height, {{2, 0}, {2, 0}, {2, 0}}, 10.0, 0.3) == -10.0);
  CHECK(reward_collision(height, {}, 10.0, 0.3) == 0.0);
  // Raising the threshold clears the same footprint.
  CHECK(reward_collision(height, {{0, 0}, {2, 0}}, 10.0, 0.5) == 0.0);
}

TEST_CASE("total reward is the sum of its four terms") {
  const GridSpec spec = make_spec(5, 5);
  CoverMap cover(spec, 0.0);
  ThreatMap threat(spec, 0.0);
  HeightMap height(spec, 0.0);
  cover(1, 1) = 0.6;
  cover(2, 1) = 0.2;
  threat(1, 1) = 0.25;
  height(2, 1) = 1.0;

  const std::vector<CellIndex> swept{{1, 1}, {2, 1}};
  const std::vector<CellIndex> occupied{{1, 1}};
  const RewardWeights w;  // 1, 2, 5, 10, 0.3

  const RewardBreakdown r =
      total_reward(cover, threat, height, swept, occupied, 8.0, 7.4, w);
  CHECK(r.cover == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.threat == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(r.goal == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.collision == -10.0);
  CHECK(r.total() == r.cover + r.threat + r.goal + r.collision);

  // Each term matches the standalone function bit-for-bit.
  CHECK(r.cover == reward_cover(cover, swept, w.cover));
  CHECK(r.threat == reward_threat(threat, occupied, w.threat));
  CHECK(r.goal == reward_goal(8.0, 7.4, w.goal));
  CHECK(r.collision ==
        reward_collision(height, swept, w.collision, w.max_safe_height));
}

TEST_CASE("default reward weights") {
  const RewardWeights w;
  CHECK(w.cover == 1.0);
  CHECK(w.threat == 2.0);
  CHECK(w.goal == 5.0);
  CHECK(w.collision == 10.0);
  CHECK(w.max_safe_height == 0.3);
}
