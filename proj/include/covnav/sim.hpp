#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "covnav/actions.hpp"
#include "covnav/astar.hpp"
#include "covnav/cql.hpp"
#include "covnav/dataset.hpp"
#include "covnav/features.hpp"
#include "covnav/maps.hpp"
#include "covnav/perception.hpp"
#include "covnav/rewards.hpp"
#include "covnav/threat.hpp"
#include "covnav/world.hpp"

namespace covnav {

// --------------------------------------------------------------------------
// Robot kinematics.
// --------------------------------------------------------------------------

struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]
  double v = 0.0;
  double omega = 0.0;
};

// Forward-Euler unicycle step: translate along the current heading, then
// rotate; heading wraps into (-pi, pi].
RobotState step(const RobotState& robot, ActionCommand cmd, double dt);

// Slows down under threat and near obstacles:
//   v' = v * (1 - 0.7 * threat_level) * (1 - 0.5 * obstacle_density)
//   w' = w * (1 - 0.5 * threat_level)
// Inputs are clamped to [0, 1]; (0, 0) leaves the command unchanged.
ActionCommand modulate_velocity(ActionCommand cmd, double threat_level,
                                double obstacle_density);

// Per-action feasibility: the one-step motion footprint must stay in-grid
// and avoid cells taller than max_safe_height. Zero-velocity actions are
// always feasible for an in-grid robot on a safe cell.
std::vector<std::uint8_t> feasible_actions(const RobotState& robot,
                                           const HeightMap& height,
                                           double max_safe_height, double dt);

// Swept cells of a straight move, clipped to the grid.
std::vector<CellIndex> motion_footprint(const GridSpec& spec, Vec2 from,
                                        Vec2 to);

// --------------------------------------------------------------------------
// Threats and scenario setup.
// --------------------------------------------------------------------------

struct ThreatAgentConfig {
  CellIndex cell;
  double eye_height = 1.5;
  double max_range = 15.0;
  std::vector<CellIndex> waypoints;  // empty => static sentry
  int patrol_period = 5;             // sim steps per one-cell patrol move
};

struct ThreatAgent {
  ThreatAgentConfig config;
  CellIndex cell;
  int waypoint_target = 0;
};

// True iff any agent has line of sight to the robot cell within its range.
bool robot_detected(const HeightMap& height,
                    const std::vector<ThreatAgent>& agents, CellIndex robot);

struct SimParams {
  double dt = 0.2;                    // seconds per step
  double goal_radius = 0.5;           // meters
  int detect_persistence = 3;         // consecutive detected steps to fail
  double cover_util_threshold = 0.5;  // cover density counting as "in cover"
  double timeout_factor = 4.0;        // of the reference path time at max v
  int min_steps = 200;
  bool disable_threat = false;        // zero the threat field (ablation)
  double p_detect = 0.9;
  double false_alarm = 0.02;
  double sensor_range = 15.0;
  double belief_diffusion = 0.05;
};

struct EpisodeSetup {
  World world;
  GridSpec grid;
  Vec2 start;
  Vec2 goal;
  std::vector<ThreatAgentConfig> threats;
  PerceptionParams perception;
  ThreatFieldParams threat;
  RewardWeights rewards;
  SimParams sim;
  double noise_sigma = 0.02;
  std::uint64_t cloud_seed = 0;
};

// Static per-world products shared by every episode on the same cloud.
struct PrebuiltEnv {
  PointCloud cloud;
  std::vector<Cluster> clusters;
  std::shared_ptr<const CoverMap> cover;
  std::shared_ptr<const HeightMap> height;
  std::shared_ptr<const GoalMap> goal;
};

PrebuiltEnv prebuild_env(const EpisodeSetup& setup);

// --------------------------------------------------------------------------
// Policies and episodes.
// --------------------------------------------------------------------------

enum class PolicyKind {
  cql,            // greedy over a trained Q table
  shortest_path,  // A* on the height-masked grid, path follower
  greedy_cover,   // A* with edge cost (1 - cover + 0.1), path follower
  straight_line,  // steers directly at the goal (behaviour data)
  random_walk     // uniform over feasible actions (behaviour data)
};

const char* to_string(PolicyKind k);

struct Policy {
  PolicyKind kind = PolicyKind::shortest_path;
  const QFunction* q = nullptr;  // required for PolicyKind::cql
};

enum class Termination { goal, detected, collision, timeout };

const char* to_string(Termination t);

struct StepRecord {
  int step = 0;
  double x = 0, y = 0, heading = 0;  // pose after the step
  double v = 0, omega = 0;           // executed (modulated) command
  int action = 0;                    // nominal action index
  RewardBreakdown reward;
  bool detected = false;
  CellIndex cell;                    // cell after the step
};

struct EpisodeMetrics {
  bool success = false;
  int steps = 0;
  double time_s = 0.0;
  double length_m = 0.0;
  double exposure = 0.0;    // fraction of steps in some threat's sight
  double cover_util = 0.0;  // fraction of steps in high-cover cells
};

struct EpisodeResult {
  Termination termination = Termination::timeout;
  EpisodeMetrics metrics;
  double start_x = 0, start_y = 0, start_heading = 0;
  std::vector<StepRecord> trace;
};

// Everything needed to re-score an episode's transitions offline.
struct EpisodeCapture {
  std::shared_ptr<const CoverMap> cover;
  std::shared_ptr<const HeightMap> height;
  std::shared_ptr<const GoalMap> goal;
  struct Step {
    double x0 = 0, y0 = 0, heading0 = 0;
    double x1 = 0, y1 = 0, heading1 = 0;
    int action = 0;
    bool terminal = false;
    std::shared_ptr<const ThreatMap> threat;       // field at the pre-step state
    std::shared_ptr<const ThreatMap> threat_next;  // field at the post-step state
  };
  std::vector<Step> steps;
};

// Runs one closed-loop episode: perception -> maps -> belief/threat ->
// policy -> dynamics. Throws InfeasibleError if start/goal are blocked or
// disconnected. Deterministic in (setup, policy, seed).
EpisodeResult run_episode(const EpisodeSetup& setup, const Policy& policy,
                          std::uint64_t seed, EpisodeCapture* capture = nullptr,
                          const PrebuiltEnv* env = nullptr);

// --------------------------------------------------------------------------
// Offline dataset construction.
// --------------------------------------------------------------------------

struct DatasetBuildParams {
  int episodes = 30;
  std::vector<std::string> augmentations = {"rot90", "rot180", "rot270"};
  double straight_weight = 0.35;
  double cover_weight = 0.35;
  double random_weight = 0.30;
  bool keep_audit = false;
  std::string hyperparameters_json = "{}";
};

// Scripted-behaviour episodes over the given setups (cycled), start
// positions jittered per episode, each augmented copy re-scored from its
// own transformed maps and poses.
Dataset build_dataset(const std::vector<EpisodeSetup>& setups,
                      const DatasetBuildParams& params, std::uint64_t seed);

// --------------------------------------------------------------------------
// Evaluation suite.
// --------------------------------------------------------------------------

struct EvalScenario {
  std::string name;
  EpisodeSetup setup;
};

struct NamedPolicy {
  std::string name;
  Policy policy;
  bool disable_threat = false;  // ablation: zeroed threat channel
};

struct TrialRow {
  std::string policy;
  std::string scenario;
  int trial = 0;
  EpisodeMetrics metrics;
  Termination termination = Termination::timeout;
};

struct SuiteResult {
  std::vector<TrialRow> rows;
};

// Runs trials x scenarios x policies; every policy sees the same sampled
// cloud within a (scenario, trial) pair. OpenMP-parallel over
// (scenario, trial) tasks with `jobs` threads; output order is fixed by
// index, independent of the schedule. Optional traces align with rows.
SuiteResult run_suite(const std::vector<EvalScenario>& scenarios,
                      const std::vector<NamedPolicy>& policies, int trials,
                      std::uint64_t seed, int jobs,
                      std::vector<EpisodeResult>* traces = nullptr);

struct SummaryRow {
  std::string policy;
  std::string scenario;
  int trials = 0;
  double success_rate = 0.0;
  double mean_time_s = 0.0;    // successful trials only
  double mean_length_m = 0.0;  // successful trials only
  double mean_exposure = 0.0;
  double mean_cover_util = 0.0;
};

std::vector<SummaryRow> summarize(const SuiteResult& suite);

void save_trials_csv(const std::string& path, const SuiteResult& suite);
void save_summary_csv(const std::string& path,
                      const std::vector<SummaryRow>& rows);

// --------------------------------------------------------------------------
// Trace files: one JSON header line, one JSON line per step.
// --------------------------------------------------------------------------

struct TraceData {
  std::string policy;
  std::string scenario;
  std::string termination;
  double goal_x = 0, goal_y = 0;
  double dt = 0.2;
  double goal_radius = 0.5;
  double cover_util_threshold = 0.5;
  double start_x = 0, start_y = 0, start_heading = 0;
  std::vector<StepRecord> steps;
};

TraceData make_trace(const EpisodeResult& result, const EpisodeSetup& setup,
                     const std::string& policy, const std::string& scenario);

void save_trace(const std::string& path, const TraceData& trace);
TraceData load_trace(const std::string& path);

// Recomputes episode metrics purely from a trace and the cover map.
EpisodeMetrics replay_metrics(const TraceData& trace, const CoverMap& cover);

}  // namespace covnav
