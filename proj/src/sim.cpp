#include "covnav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "covnav/errors.hpp"
#include "covnav/rng.hpp"

namespace covnav {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

double dist2d(double ax, double ay, double bx, double by) {
  return std::hypot(ax - bx, ay - by);
}

}  // namespace

RobotState step(const RobotState& robot, ActionCommand cmd, double dt) {
  RobotState next = robot;
  next.x = robot.x + cmd.v * std::cos(robot.heading) * dt;
  next.y = robot.y + cmd.v * std::sin(robot.heading) * dt;
  next.heading = wrap_angle(robot.heading + cmd.omega * dt);
  next.v = cmd.v;
  next.omega = cmd.omega;
  return next;
}

ActionCommand modulate_velocity(ActionCommand cmd, double threat_level,
                                double obstacle_density) {
  const double t = std::clamp(threat_level, 0.0, 1.0);
  const double o = std::clamp(obstacle_density, 0.0, 1.0);
  ActionCommand out;
  out.v = cmd.v * (1.0 - 0.7 * t) * (1.0 - 0.5 * o);
  out.omega = cmd.omega * (1.0 - 0.5 * t);
  out.v = std::clamp(out.v, 0.0, kMaxLinear);
  out.omega = std::clamp(out.omega, -kMaxAngular, kMaxAngular);
  return out;
}

// Swept cells clipped to the grid; cells outside are dropped (feasibility
// checks reject such motions before they are executed).
static std::vector<CellIndex> motion_footprint_impl(const GridSpec& spec,
                                                    Vec2 from, Vec2 to) {
  std::vector<CellIndex> cells =
      swept_cells(from, to, spec.origin_x, spec.origin_y, spec.cell_size);
  std::vector<CellIndex> out;
  out.reserve(cells.size());
  for (CellIndex c : cells)
    if (spec.contains(c)) out.push_back(c);
  return out;
}

std::vector<std::uint8_t> feasible_actions(const RobotState& robot,
                                           const HeightMap& height,
                                           double max_safe_height, double dt) {
  const GridSpec& spec = height.spec();
  std::vector<std::uint8_t> mask(kNumActions, 0);
  for (int a = 0; a < kNumActions; ++a) {
    const RobotState next = step(robot, decode_action(a), dt);
    const std::vector<CellIndex> cells =
        swept_cells({robot.x, robot.y}, {next.x, next.y}, spec.origin_x,
                    spec.origin_y, spec.cell_size);
    bool ok = true;
    for (CellIndex c : cells) {
      if (!spec.contains(c) || height(c) > max_safe_height) {
        ok = false;
        break;
      }
    }
    mask[a] = ok ? 1 : 0;
  }
  return mask;
}

bool robot_detected(const HeightMap& height,
                    const std::vector<ThreatAgent>& agents, CellIndex robot) {
  for (const ThreatAgent& agent : agents) {
    const VisionParams vision{agent.config.eye_height, agent.config.max_range};
    if (line_of_sight(height, agent.cell, robot, vision)) return true;
  }
  return false;
}

const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::cql: return "cql";
    case PolicyKind::shortest_path: return "shortest_path";
    case PolicyKind::greedy_cover: return "greedy_cover";
    case PolicyKind::straight_line: return "straight_line";
    case PolicyKind::random_walk: return "random_walk";
  }
  return "?";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::goal: return "goal";
    case Termination::detected: return "detected";
    case Termination::collision: return "collision";
    case Termination::timeout: return "timeout";
  }
  return "?";
}

PrebuiltEnv prebuild_env(const EpisodeSetup& setup) {
  PrebuiltEnv env;
  env.cloud = sample_point_cloud(setup.world, setup.noise_sigma, setup.cloud_seed);
  env.clusters = euclidean_cluster(env.cloud, setup.perception);
  const std::vector<std::uint32_t> cover_idx =
      cover_points(env.cloud, env.clusters, setup.perception);
  env.cover = std::make_shared<CoverMap>(
      build_cover_map(env.cloud, cover_idx, setup.grid));
  env.height = std::make_shared<HeightMap>(
      build_height_map(env.cloud, setup.grid, 0.0));
  env.goal = std::make_shared<GoalMap>(
      build_goal_map(setup.grid, setup.goal.x, setup.goal.y));
  return env;
}

namespace {

// Path follower shared by the A* baselines and the straight-line behaviour.
struct Follower {
  std::vector<CellIndex> path;  // empty => steer at the goal point
  double lookahead = 1.5;

  Vec2 waypoint(const GridSpec& spec, const RobotState& robot,
                Vec2 goal) const {
    if (path.empty()) return goal;
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); ++k) {
      const double d = dist2d(robot.x, robot.y, spec.center_x(path[k].i),
                              spec.center_y(path[k].j));
      if (d < best) {
        best = d;
        nearest = k;
      }
    }
    double walked = 0.0;
    std::size_t j = nearest;
    while (j + 1 < path.size() && walked < lookahead) {
      walked += spec.cell_size *
                std::hypot(static_cast<double>(path[j + 1].i - path[j].i),
                           static_cast<double>(path[j + 1].j - path[j].j));
      ++j;
    }
    if (j + 1 >= path.size()) return goal;
    return {spec.center_x(path[j].i), spec.center_y(path[j].j)};
  }

  int choose(const GridSpec& spec, const RobotState& robot, Vec2 goal,
             const std::vector<std::uint8_t>& mask, double dt) const {
    const Vec2 wp = waypoint(spec, robot, goal);
    const double desired = std::atan2(wp.y - robot.y, wp.x - robot.x);
    int best = kStopAction;
    double best_score = std::numeric_limits<double>::infinity();
    for (int a = 0; a < kNumActions; ++a) {
      if (!mask[a]) continue;
      const RobotState next = step(robot, decode_action(a), dt);
      const double score = dist2d(next.x, next.y, wp.x, wp.y) +
                           0.15 * std::abs(wrap_angle(desired - next.heading));
      if (score < best_score) {
        best_score = score;
        best = a;
      }
    }
    return best;
  }
};

void advance_patrols(std::vector<ThreatAgent>& agents, int step_index,
                     const GridSpec& spec) {
  for (ThreatAgent& agent : agents) {
    if (agent.config.waypoints.empty()) continue;
    if ((step_index + 1) % std::max(1, agent.config.patrol_period) != 0)
      continue;
    const CellIndex wp =
        agent.config.waypoints[agent.waypoint_target %
                               agent.config.waypoints.size()];
    if (agent.cell == wp) {
      agent.waypoint_target =
          (agent.waypoint_target + 1) %
          static_cast<int>(agent.config.waypoints.size());
      continue;
    }
    CellIndex next{agent.cell.i + sgn(wp.i - agent.cell.i),
                   agent.cell.j + sgn(wp.j - agent.cell.j)};
    if (spec.contains(next)) agent.cell = next;
  }
}

}  // namespace

std::vector<CellIndex> motion_footprint(const GridSpec& spec, Vec2 from,
                                        Vec2 to) {
  return motion_footprint_impl(spec, from, to);
}

EpisodeResult run_episode(const EpisodeSetup& setup, const Policy& policy,
                          std::uint64_t seed, EpisodeCapture* capture,
                          const PrebuiltEnv* env_in) {
  if (policy.kind == PolicyKind::cql && policy.q == nullptr)
    throw std::invalid_argument("run_episode: cql policy without a Q table");

  PrebuiltEnv local_env;
  if (!env_in) {
    local_env = prebuild_env(setup);
    env_in = &local_env;
  }
  const PrebuiltEnv& env = *env_in;
  const GridSpec& spec = setup.grid;
  const CoverMap& cover = *env.cover;
  const HeightMap& height = *env.height;
  const GoalMap& goal_map = *env.goal;
  const double h_max = setup.rewards.max_safe_height;

  const auto start_cell = project_point(spec, setup.start.x, setup.start.y);
  const auto goal_cell = project_point(spec, setup.goal.x, setup.goal.y);
  if (!start_cell || !goal_cell)
    throw InfeasibleError("episode start or goal outside the grid");
  if (height(*start_cell) > h_max)
    throw InfeasibleError("episode start cell is blocked");
  if (height(*goal_cell) > h_max)
    throw InfeasibleError("episode goal cell is blocked");

  const auto passable = [&](CellIndex c) { return height(c) <= h_max; };
  const AStarResult base_path =
      astar_grid(spec, passable, [](CellIndex) { return 1.0; }, 1.0,
                 *start_cell, *goal_cell);
  if (!base_path.found)
    throw InfeasibleError("no traversable path from start to goal");

  const double base_len = path_length_m(base_path.path, spec.cell_size);
  const int steps_max = std::max(
      setup.sim.min_steps,
      static_cast<int>(std::ceil(setup.sim.timeout_factor * base_len /
                                 (kMaxLinear * setup.sim.dt))));

  Follower follower;
  if (policy.kind == PolicyKind::shortest_path) {
    follower.path = base_path.path;
  } else if (policy.kind == PolicyKind::greedy_cover) {
    const AStarResult cover_path = astar_grid(
        spec, passable,
        [&](CellIndex c) { return 1.0 - cover(c) + 0.1; }, 0.1, *start_cell,
        *goal_cell);
    follower.path = cover_path.found ? cover_path.path : base_path.path;
  }

  EpisodeResult result;
  RobotState robot{setup.start.x, setup.start.y,
                   std::atan2(setup.goal.y - setup.start.y,
                              setup.goal.x - setup.start.x),
                   0.0, 0.0};
  result.start_x = robot.x;
  result.start_y = robot.y;
  result.start_heading = robot.heading;

  if (dist2d(robot.x, robot.y, setup.goal.x, setup.goal.y) <=
      setup.sim.goal_radius) {
    result.termination = Termination::goal;
    result.metrics.success = true;
    return result;
  }

  Rng rng(derive_seed(seed, 0x51));
  std::vector<ThreatAgent> agents;
  for (const ThreatAgentConfig& cfg : setup.threats) {
    if (!spec.contains(cfg.cell))
      throw InfeasibleError("threat agent outside the grid");
    agents.push_back({cfg, cfg.cell, 0});
  }

  ThreatBelief belief = uniform_belief(spec);
  VisibilityCache vantage_cache(height, setup.threat.vision);
  VisionParams scan_vision = setup.threat.vision;
  scan_vision.max_range = setup.sim.sensor_range;
  VisibilityCache scan_cache(height, scan_vision);
  const auto zero_threat = std::make_shared<const ThreatMap>(spec, 0.0);

  int persist = 0, detected_steps = 0, cover_steps = 0;
  result.termination = Termination::timeout;

  for (int t = 0; t < steps_max; ++t) {
    const auto cell_opt = project_point(spec, robot.x, robot.y);
    if (!cell_opt) throw std::logic_error("robot left the grid");
    const CellIndex cell = *cell_opt;

    // Observe: scan, roll detections (misses and false alarms), update the
    // belief, refresh the threat field.
    const std::vector<std::uint8_t>& scanned = scan_cache.from(cell);
    std::vector<std::uint8_t> detections(spec.size(), 0);
    for (const ThreatAgent& agent : agents) {
      const std::size_t aidx = spec.index(agent.cell);
      if (scanned[aidx] && rng.bernoulli(setup.sim.p_detect))
        detections[aidx] = 1;
    }
    if (setup.sim.false_alarm > 0.0) {
      for (std::size_t c = 0; c < spec.size(); ++c)
        if (scanned[c] && rng.bernoulli(setup.sim.false_alarm))
          detections[c] = 1;
    }
    belief = belief_update(belief,
                           observation_likelihood(scanned, detections,
                                                  setup.sim.p_detect))
                 .posterior;
    if (setup.sim.belief_diffusion > 0.0)
      belief = diffuse_belief(belief, setup.sim.belief_diffusion);

    std::shared_ptr<const ThreatMap> tmap;
    if (setup.sim.disable_threat) {
      tmap = zero_threat;
    } else {
      tmap = std::make_shared<ThreatMap>(
          threat_field({cell}, belief, height, cover, goal_map, setup.threat,
                       &vantage_cache));
    }

    // Decide.
    const StateFeatures features =
        extract_features(cover, *tmap, height, goal_map, robot.x, robot.y,
                         robot.heading, h_max);
    const std::vector<std::uint8_t> mask =
        feasible_actions(robot, height, h_max, setup.sim.dt);
    int action = kStopAction;
    switch (policy.kind) {
      case PolicyKind::cql:
        action = policy.q->greedy_action(state_index(features), mask);
        break;
      case PolicyKind::shortest_path:
      case PolicyKind::greedy_cover:
      case PolicyKind::straight_line:
        action = follower.choose(spec, robot, setup.goal, mask, setup.sim.dt);
        break;
      case PolicyKind::random_walk: {
        std::vector<int> open;
        for (int a = 0; a < kNumActions; ++a)
          if (mask[a]) open.push_back(a);
        action = open[rng.uniform_index(open.size())];
        break;
      }
    }

    // Act.
    int obstacles = 0, neighbours = 0;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int ni = cell.i + di, nj = cell.j + dj;
        if (!spec.contains(ni, nj)) continue;
        ++neighbours;
        if (height(ni, nj) > h_max) ++obstacles;
      }
    const double obstacle_density =
        neighbours ? static_cast<double>(obstacles) / neighbours : 0.0;
    const ActionCommand nominal = decode_action(action);
    const ActionCommand executed =
        modulate_velocity(nominal, (*tmap)(cell), obstacle_density);
    const RobotState next = step(robot, executed, setup.sim.dt);

    const std::vector<CellIndex> swept =
        motion_footprint_impl(spec, {robot.x, robot.y}, {next.x, next.y});
    const double d_prev = dist2d(robot.x, robot.y, setup.goal.x, setup.goal.y);
    const double d_next = dist2d(next.x, next.y, setup.goal.x, setup.goal.y);
    const RewardBreakdown reward =
        total_reward(cover, *tmap, height, swept, {cell}, d_prev, d_next,
                     setup.rewards);

    const auto next_cell_opt = project_point(spec, next.x, next.y);
    if (!next_cell_opt) throw std::logic_error("robot stepped off the grid");
    const CellIndex next_cell = *next_cell_opt;
    const bool detected_now = robot_detected(height, agents, next_cell);

    if (capture) {
      EpisodeCapture::Step cap;
      cap.x0 = robot.x;
      cap.y0 = robot.y;
      cap.heading0 = robot.heading;
      cap.x1 = next.x;
      cap.y1 = next.y;
      cap.heading1 = next.heading;
      cap.action = action;
      cap.threat = tmap;
      capture->steps.push_back(std::move(cap));
    }

    robot = next;

    StepRecord rec;
    rec.step = t;
    rec.x = robot.x;
    rec.y = robot.y;
    rec.heading = robot.heading;
    rec.v = executed.v;
    rec.omega = executed.omega;
    rec.action = action;
    rec.reward = reward;
    rec.detected = detected_now;
    rec.cell = next_cell;
    result.trace.push_back(rec);

    if (detected_now) {
      ++detected_steps;
      ++persist;
    } else {
      persist = 0;
    }
    if (cover(next_cell) >= setup.sim.cover_util_threshold) ++cover_steps;

    advance_patrols(agents, t, spec);

    const bool collided = reward.collision < 0.0;
    if (d_next <= setup.sim.goal_radius) {
      result.termination = Termination::goal;
      break;
    }
    if (collided) {
      result.termination = Termination::collision;
      break;
    }
    if (persist >= setup.sim.detect_persistence) {
      result.termination = Termination::detected;
      break;
    }
  }

  const int steps = static_cast<int>(result.trace.size());
  result.metrics.steps = steps;
  result.metrics.success = result.termination == Termination::goal;
  result.metrics.time_s = steps * setup.sim.dt;
  // Path length from consecutive poses (start pose included).
  double length = 0.0;
  double px = result.start_x, py = result.start_y;
  for (const StepRecord& rec : result.trace) {
    length += dist2d(px, py, rec.x, rec.y);
    px = rec.x;
    py = rec.y;
  }
  result.metrics.length_m = length;
  result.metrics.exposure =
      steps ? static_cast<double>(detected_steps) / steps : 0.0;
  result.metrics.cover_util =
      steps ? static_cast<double>(cover_steps) / steps : 0.0;

  if (capture) {
    capture->cover = env.cover;
    capture->height = env.height;
    capture->goal = env.goal;
    for (std::size_t k = 0; k + 1 < capture->steps.size(); ++k)
      capture->steps[k].threat_next = capture->steps[k + 1].threat;
    if (!capture->steps.empty()) {
      capture->steps.back().threat_next = capture->steps.back().threat;
      capture->steps.back().terminal = true;
    }
  }
  return result;
}

// --------------------------------------------------------------------------
// Dataset construction.
// --------------------------------------------------------------------------

namespace {

struct TransformedMaps {
  GridSpec spec;
  std::shared_ptr<const CoverMap> cover;
  std::shared_ptr<const HeightMap> height;
  std::shared_ptr<const GoalMap> goal;
};

TransformedMaps transform_maps(const EpisodeCapture& capture,
                               const Augmentation& aug) {
  TransformedMaps out;
  out.spec = transform_spec(capture.cover->spec(), aug);
  out.cover = std::make_shared<CoverMap>(transform_grid(*capture.cover, aug));
  out.height = std::make_shared<HeightMap>(transform_grid(*capture.height, aug));
  double gx = capture.goal->goal_x, gy = capture.goal->goal_y;
  transform_point(capture.cover->spec(), aug, gx, gy);
  out.goal = std::make_shared<GoalMap>(build_goal_map(out.spec, gx, gy));
  return out;
}

}  // namespace

Dataset build_dataset(const std::vector<EpisodeSetup>& setups,
                      const DatasetBuildParams& params, std::uint64_t seed) {
  if (setups.empty())
    throw std::invalid_argument("build_dataset: no episode setups");
  if (params.episodes < 0)
    throw std::invalid_argument("build_dataset: negative episode count");

  Dataset ds;
  ds.grid = setups.front().grid;
  ds.seed = seed;
  ds.augmentations = params.augmentations;
  ds.hyperparameters_json = params.hyperparameters_json;

  // Per-setup prebuilt environments (one cloud per setup).
  std::vector<PrebuiltEnv> envs;
  envs.reserve(setups.size());
  for (const EpisodeSetup& s : setups) envs.push_back(prebuild_env(s));

  Rng rng(derive_seed(seed, 0xDA));
  const double total_w =
      params.straight_weight + params.cover_weight + params.random_weight;
  if (total_w <= 0.0)
    throw std::invalid_argument("build_dataset: behaviour weights sum to 0");

  for (int ep = 0; ep < params.episodes; ++ep) {
    const std::size_t si = ep % setups.size();
    EpisodeSetup setup = setups[si];
    const PrebuiltEnv& env = envs[si];
    const GridSpec& spec = setup.grid;

    // Jittered start: any passable cell within 3 cells of the base start.
    const double h_max = setup.rewards.max_safe_height;
    for (int attempt = 0; attempt < 25; ++attempt) {
      const double jx =
          setup.start.x + rng.uniform_int(-3, 3) * spec.cell_size;
      const double jy =
          setup.start.y + rng.uniform_int(-3, 3) * spec.cell_size;
      const auto c = project_point(spec, jx, jy);
      if (c && (*env.height)(*c) <= h_max &&
          dist2d(jx, jy, setup.goal.x, setup.goal.y) > setup.sim.goal_radius) {
        setup.start = {jx, jy};
        break;
      }
    }

    const double u = rng.uniform() * total_w;
    Policy behaviour;
    behaviour.kind = (u < params.straight_weight) ? PolicyKind::straight_line
                     : (u < params.straight_weight + params.cover_weight)
                         ? PolicyKind::greedy_cover
                         : PolicyKind::random_walk;

    EpisodeCapture capture;
    try {
      run_episode(setup, behaviour, derive_seed(seed, 0xE000 + ep), &capture,
                  &env);
    } catch (const InfeasibleError&) {
      continue;  // unlucky jitter; skip this episode
    }

    // Base copy plus augmented copies, each scored from its own maps/poses.
    std::vector<std::pair<std::string, Augmentation>> copies;
    copies.emplace_back("", Augmentation{});
    for (const std::string& name : params.augmentations)
      copies.emplace_back(name, parse_augmentation(name));

    for (const auto& [name, aug] : copies) {
      const TransformedMaps maps = transform_maps(capture, aug);
      // Threat snapshots transform once per distinct map.
      std::map<const ThreatMap*, std::shared_ptr<const ThreatMap>> tcache;
      const auto transform_threat = [&](const std::shared_ptr<const ThreatMap>& t) {
        auto it = tcache.find(t.get());
        if (it == tcache.end())
          it = tcache
                   .emplace(t.get(), std::make_shared<ThreatMap>(
                                         transform_grid(*t, aug)))
                   .first;
        return it->second;
      };

      for (std::size_t k = 0; k < capture.steps.size(); ++k) {
        const EpisodeCapture::Step& st = capture.steps[k];
        double x0 = st.x0, y0 = st.y0, hd0 = st.heading0;
        double x1 = st.x1, y1 = st.y1, hd1 = st.heading1;
        transform_pose(spec, aug, x0, y0, hd0);
        transform_pose(spec, aug, x1, y1, hd1);
        const auto threat_t = transform_threat(st.threat);
        const auto threat_next_t = transform_threat(st.threat_next);

        const auto cell0 = project_point(maps.spec, x0, y0);
        if (!cell0) throw std::logic_error("augmented pose off-grid");
        const std::vector<CellIndex> swept =
            motion_footprint_impl(maps.spec, {x0, y0}, {x1, y1});
        const double d_prev = dist2d(x0, y0, maps.goal->goal_x, maps.goal->goal_y);
        const double d_next = dist2d(x1, y1, maps.goal->goal_x, maps.goal->goal_y);
        const RewardBreakdown reward =
            total_reward(*maps.cover, *threat_t, *maps.height, swept, {*cell0},
                         d_prev, d_next, setup.rewards);

        Transition tr;
        tr.state = static_cast<std::uint16_t>(state_index(extract_features(
            *maps.cover, *threat_t, *maps.height, *maps.goal, x0, y0, hd0,
            h_max)));
        tr.action = static_cast<std::uint8_t>(st.action);
        tr.reward = reward.total();
        tr.next_state = static_cast<std::uint16_t>(state_index(extract_features(
            *maps.cover, *threat_next_t, *maps.height, *maps.goal, x1, y1, hd1,
            h_max)));
        tr.terminal = st.terminal ? 1 : 0;
        ds.transitions.push_back(tr);

        if (params.keep_audit) {
          TransitionAudit audit;
          audit.episode = ep;
          audit.step = static_cast<int>(k);
          audit.augmentation = name;
          audit.x0 = x0;
          audit.y0 = y0;
          audit.heading0 = hd0;
          audit.x1 = x1;
          audit.y1 = y1;
          audit.heading1 = hd1;
          audit.cover = maps.cover;
          audit.height = maps.height;
          audit.goal = maps.goal;
          audit.threat = threat_t;
          audit.threat_next = threat_next_t;
          ds.audit.push_back(std::move(audit));
        }
      }
    }
  }
  return ds;
}

// --------------------------------------------------------------------------
// Evaluation suite.
// --------------------------------------------------------------------------

SuiteResult run_suite(const std::vector<EvalScenario>& scenarios,
                      const std::vector<NamedPolicy>& policies, int trials,
                      std::uint64_t seed, int jobs,
                      std::vector<EpisodeResult>* traces) {
  if (scenarios.empty() || policies.empty() || trials <= 0)
    throw std::invalid_argument("run_suite: empty scenario/policy/trial set");
  jobs = std::max(1, jobs);

  const int num_tasks = static_cast<int>(scenarios.size()) * trials;
  const int num_policies = static_cast<int>(policies.size());
  SuiteResult suite;
  suite.rows.resize(static_cast<std::size_t>(num_tasks) * num_policies);
  if (traces) traces->resize(suite.rows.size());

  std::string error;
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (int task = 0; task < num_tasks; ++task) {
    const int sc = task / trials;
    const int tr = task % trials;
    try {
      EpisodeSetup base = scenarios[sc].setup;
      base.cloud_seed = derive_seed(seed, 0xC0000 + task);
      const PrebuiltEnv env = prebuild_env(base);
      for (int p = 0; p < num_policies; ++p) {
        EpisodeSetup setup = base;
        setup.sim.disable_threat =
            setup.sim.disable_threat || policies[p].disable_threat;
        const std::uint64_t ep_seed = derive_seed(
            seed, 0xF0000 + static_cast<std::uint64_t>(task) * num_policies + p);
        EpisodeResult res =
            run_episode(setup, policies[p].policy, ep_seed, nullptr, &env);
        const std::size_t row =
            static_cast<std::size_t>(task) * num_policies + p;
        suite.rows[row] = {policies[p].name, scenarios[sc].name, tr,
                           res.metrics, res.termination};
        if (traces) (*traces)[row] = std::move(res);
      }
    } catch (const std::exception& e) {
#pragma omp critical
      if (error.empty()) error = e.what();
    }
  }
  if (!error.empty()) throw InfeasibleError("run_suite: " + error);
  return suite;
}

std::vector<SummaryRow> summarize(const SuiteResult& suite) {
  std::vector<SummaryRow> out;
  const auto find = [&](const std::string& policy,
                        const std::string& scenario) -> SummaryRow& {
    for (SummaryRow& r : out)
      if (r.policy == policy && r.scenario == scenario) return r;
    out.push_back({policy, scenario, 0, 0, 0, 0, 0, 0});
    return out.back();
  };
  for (const TrialRow& row : suite.rows) {
    SummaryRow& s = find(row.policy, row.scenario);
    ++s.trials;
    s.success_rate += row.metrics.success ? 1.0 : 0.0;
    if (row.metrics.success) {
      s.mean_time_s += row.metrics.time_s;
      s.mean_length_m += row.metrics.length_m;
    }
    s.mean_exposure += row.metrics.exposure;
    s.mean_cover_util += row.metrics.cover_util;
  }
  for (SummaryRow& s : out) {
    const double succ = s.success_rate;  // still a count here
    if (succ > 0) {
      s.mean_time_s /= succ;
      s.mean_length_m /= succ;
    }
    s.mean_exposure /= s.trials;
    s.mean_cover_util /= s.trials;
    s.success_rate = succ / s.trials;
  }
  return out;
}

void save_trials_csv(const std::string& path, const SuiteResult& suite) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for write: " + path);
  os << "policy,scenario,trial,success,time_s,length_m,exposure,cover_util\n";
  char buf[256];
  for (const TrialRow& r : suite.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%.9g,%.9g,%.9g,%.9g\n",
                  r.policy.c_str(), r.scenario.c_str(), r.trial,
                  r.metrics.success ? 1 : 0, r.metrics.time_s,
                  r.metrics.length_m, r.metrics.exposure,
                  r.metrics.cover_util);
    os << buf;
  }
  if (!os) throw IoError("write failed: " + path);
}

void save_summary_csv(const std::string& path,
                      const std::vector<SummaryRow>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for write: " + path);
  os << "policy,scenario,trials,success_rate,mean_time_s,mean_length_m,"
        "mean_exposure,mean_cover_util\n";
  char buf[256];
  for (const SummaryRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  r.policy.c_str(), r.scenario.c_str(), r.trials,
                  r.success_rate, r.mean_time_s, r.mean_length_m,
                  r.mean_exposure, r.mean_cover_util);
    os << buf;
  }
  if (!os) throw IoError("write failed: " + path);
}

// --------------------------------------------------------------------------
// Traces.
// --------------------------------------------------------------------------

TraceData make_trace(const EpisodeResult& result, const EpisodeSetup& setup,
                     const std::string& policy, const std::string& scenario) {
  TraceData t;
  t.policy = policy;
  t.scenario = scenario;
  t.termination = to_string(result.termination);
  t.goal_x = setup.goal.x;
  t.goal_y = setup.goal.y;
  t.dt = setup.sim.dt;
  t.goal_radius = setup.sim.goal_radius;
  t.cover_util_threshold = setup.sim.cover_util_threshold;
  t.start_x = result.start_x;
  t.start_y = result.start_y;
  t.start_heading = result.start_heading;
  t.steps = result.trace;
  return t;
}

void save_trace(const std::string& path, const TraceData& trace) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for write: " + path);
  ordered_json header;
  header["version"] = "trace.v1";
  header["policy"] = trace.policy;
  header["scenario"] = trace.scenario;
  header["termination"] = trace.termination;
  header["goal"] = {trace.goal_x, trace.goal_y};
  header["dt"] = trace.dt;
  header["goal_radius"] = trace.goal_radius;
  header["cover_util_threshold"] = trace.cover_util_threshold;
  header["start"] = {trace.start_x, trace.start_y, trace.start_heading};
  os << header.dump() << '\n';
  for (const StepRecord& s : trace.steps) {
    ordered_json j;
    j["step"] = s.step;
    j["pose"] = {s.x, s.y, s.heading};
    j["cmd"] = {s.v, s.omega};
    j["action"] = s.action;
    j["reward"] = {{"cover", s.reward.cover},
                   {"threat", s.reward.threat},
                   {"goal", s.reward.goal},
                   {"collision", s.reward.collision},
                   {"total", s.reward.total()}};
    j["detected"] = s.detected;
    j["cell"] = {s.cell.i, s.cell.j};
    os << j.dump() << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

TraceData load_trace(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) throw IoError("trace: empty file: " + path);
  json header = json::parse(line);
  if (!header.contains("version") || header["version"] != "trace.v1")
    throw IoError("trace: unsupported version");
  TraceData t;
  t.policy = header.at("policy").get<std::string>();
  t.scenario = header.at("scenario").get<std::string>();
  t.termination = header.at("termination").get<std::string>();
  t.goal_x = header.at("goal")[0].get<double>();
  t.goal_y = header.at("goal")[1].get<double>();
  t.dt = header.at("dt").get<double>();
  t.goal_radius = header.at("goal_radius").get<double>();
  t.cover_util_threshold = header.at("cover_util_threshold").get<double>();
  t.start_x = header.at("start")[0].get<double>();
  t.start_y = header.at("start")[1].get<double>();
  t.start_heading = header.at("start")[2].get<double>();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    StepRecord s;
    s.step = j.at("step").get<int>();
    s.x = j.at("pose")[0].get<double>();
    s.y = j.at("pose")[1].get<double>();
    s.heading = j.at("pose")[2].get<double>();
    s.v = j.at("cmd")[0].get<double>();
    s.omega = j.at("cmd")[1].get<double>();
    s.action = j.at("action").get<int>();
    s.reward.cover = j.at("reward").at("cover").get<double>();
    s.reward.threat = j.at("reward").at("threat").get<double>();
    s.reward.goal = j.at("reward").at("goal").get<double>();
    s.reward.collision = j.at("reward").at("collision").get<double>();
    s.detected = j.at("detected").get<bool>();
    s.cell = {j.at("cell")[0].get<int>(), j.at("cell")[1].get<int>()};
    t.steps.push_back(s);
  }
  return t;
}

EpisodeMetrics replay_metrics(const TraceData& trace, const CoverMap& cover) {
  EpisodeMetrics m;
  const int steps = static_cast<int>(trace.steps.size());
  m.steps = steps;
  m.time_s = steps * trace.dt;
  double length = 0.0;
  double px = trace.start_x, py = trace.start_y;
  int detected = 0, in_cover = 0;
  for (const StepRecord& s : trace.steps) {
    length += dist2d(px, py, s.x, s.y);
    px = s.x;
    py = s.y;
    if (s.detected) ++detected;
    if (cover(s.cell) >= trace.cover_util_threshold) ++in_cover;
  }
  m.length_m = length;
  m.exposure = steps ? static_cast<double>(detected) / steps : 0.0;
  m.cover_util = steps ? static_cast<double>(in_cover) / steps : 0.0;
  if (steps == 0) {
    m.success = dist2d(trace.start_x, trace.start_y, trace.goal_x,
                       trace.goal_y) <= trace.goal_radius;
  } else {
    m.success = dist2d(px, py, trace.goal_x, trace.goal_y) <= trace.goal_radius;
  }
  return m;
}

}  // namespace covnav
