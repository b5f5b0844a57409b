#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covnav/cql.hpp"
#include "covnav/perception.hpp"
#include "covnav/rewards.hpp"
#include "covnav/sim.hpp"
#include "covnav/threat.hpp"
#include "covnav/world.hpp"

namespace covnav {

struct WorldSection {
  Scenario scenario = Scenario::mixed;
  double extent_x = 50.0;
  double extent_y = 50.0;
  std::uint64_t seed = 1;
  double noise_sigma = 0.02;
};

struct MapsSection {
  double goal_x = 45.0;
  double goal_y = 25.0;
};

// A self-contained evaluation/training scenario: a generated world plus
// start, goal and threat placements.
struct ScenarioSpec {
  std::string name;
  Scenario world_kind = Scenario::mixed;
  double extent_x = 50.0;
  double extent_y = 50.0;
  std::uint64_t world_seed = 1;
  Vec2 start{5.5, 25.5};
  Vec2 goal{45.5, 25.5};
  std::vector<ThreatAgentConfig> threats;
};

struct DatasetSection {
  int episodes = 30;
  std::vector<std::string> augmentations = {"rot90", "rot180", "rot270"};
  double straight_weight = 0.35;
  double cover_weight = 0.35;
  double random_weight = 0.30;
  std::vector<ScenarioSpec> scenarios;
};

struct EvalSection {
  int trials = 10;
  int jobs = 1;
  std::vector<ScenarioSpec> scenarios;
};

struct RunConfig {
  GridSpec grid{50, 50, 1.0, 0.0, 0.0};
  WorldSection world;
  PerceptionParams perception;
  ThreatFieldParams threat;
  RewardWeights rewards;
  CqlParams cql;
  SimParams sim;
  MapsSection maps;
  DatasetSection dataset;
  EvalSection eval;
};

// Parses and validates a config JSON document ("config.v1"): unknown keys
// are rejected, every numeric field is range-checked. When apply_env is
// true, environment variables COVNAV_<SECTION>_<KEY> (e.g. COVNAV_CQL_LR)
// override scalar values between file load and validation. Throws
// ConfigError with the offending path.
RunConfig parse_run_config(const std::string& json_text, bool apply_env);
RunConfig load_run_config(const std::string& path);  // file + env + validation

// Full round-trippable dump of a config (always emits every key).
std::string run_config_to_json(const RunConfig& config);

// Materializes a scenario into an episode setup using the config's shared
// parameter sections.
EpisodeSetup make_setup(const RunConfig& config, const ScenarioSpec& spec);

}  // namespace covnav
