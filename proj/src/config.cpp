#include "covnav/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "covnav/errors.hpp"
#include "covnav/rng.hpp"

namespace covnav {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void reject_unknown(const json& j, const std::string& path,
                    const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw ConfigError(path + ": unknown key '" + key + "'");
}

double get_num(const json& j, const std::string& path, const char* key,
               double lo, double hi, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw ConfigError(path + "." + key + ": expected a number");
  const double v = j.at(key).get<double>();
  if (v < lo || v > hi)
    throw ConfigError(path + "." + key + ": value " + std::to_string(v) +
                      " outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  return v;
}

int get_int(const json& j, const std::string& path, const char* key, int lo,
            int hi, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw ConfigError(path + "." + key + ": expected an integer");
  const long long v = j.at(key).get<long long>();
  if (v < lo || v > hi)
    throw ConfigError(path + "." + key + ": value " + std::to_string(v) +
                      " outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  return static_cast<int>(v);
}

bool get_bool(const json& j, const std::string& path, const char* key,
              bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean())
    throw ConfigError(path + "." + key + ": expected a boolean");
  return j.at(key).get<bool>();
}

std::uint64_t get_seed(const json& j, const std::string& path, const char* key,
                       std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_unsigned() && !j.at(key).is_number_integer())
    throw ConfigError(path + "." + key + ": expected a non-negative integer");
  if (j.at(key).is_number_integer() && j.at(key).get<long long>() < 0)
    throw ConfigError(path + "." + key + ": seed must be non-negative");
  return j.at(key).get<std::uint64_t>();
}

ThreatAgentConfig parse_threat_agent(const json& j, const std::string& path) {
  reject_unknown(j, path,
                 {"cell", "eye_height", "max_range", "waypoints",
                  "patrol_period"});
  ThreatAgentConfig cfg;
  if (!j.contains("cell") || !j.at("cell").is_array() ||
      j.at("cell").size() != 2)
    throw ConfigError(path + ".cell: expected [i, j]");
  cfg.cell = {j.at("cell")[0].get<int>(), j.at("cell")[1].get<int>()};
  cfg.eye_height = get_num(j, path, "eye_height", 0.1, 100.0, cfg.eye_height);
  cfg.max_range = get_num(j, path, "max_range", 0.1, 1e4, cfg.max_range);
  cfg.patrol_period = get_int(j, path, "patrol_period", 1, 100000,
                              cfg.patrol_period);
  if (j.contains("waypoints")) {
    for (const json& w : j.at("waypoints")) {
      if (!w.is_array() || w.size() != 2)
        throw ConfigError(path + ".waypoints: expected [i, j] entries");
      cfg.waypoints.push_back({w[0].get<int>(), w[1].get<int>()});
    }
  }
  return cfg;
}

ScenarioSpec parse_scenario(const json& j, const std::string& path) {
  reject_unknown(j, path, {"name", "world", "start", "goal", "threats"});
  ScenarioSpec spec;
  if (!j.contains("name") || !j.at("name").is_string())
    throw ConfigError(path + ".name: required string");
  spec.name = j.at("name").get<std::string>();
  if (j.contains("world")) {
    const json& w = j.at("world");
    reject_unknown(w, path + ".world", {"scenario", "extent_x", "extent_y", "seed"});
    if (w.contains("scenario")) {
      try {
        spec.world_kind = scenario_from_string(w.at("scenario").get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(path + ".world.scenario: " + e.what());
      }
    }
    spec.extent_x = get_num(w, path + ".world", "extent_x", 10.0, 1e4, spec.extent_x);
    spec.extent_y = get_num(w, path + ".world", "extent_y", 10.0, 1e4, spec.extent_y);
    spec.world_seed = get_seed(w, path + ".world", "seed", spec.world_seed);
  }
  const auto read_point = [&](const char* key, Vec2 fallback) {
    if (!j.contains(key)) return fallback;
    const json& p = j.at(key);
    if (!p.is_array() || p.size() != 2)
      throw ConfigError(path + "." + key + ": expected [x, y]");
    return Vec2{p[0].get<double>(), p[1].get<double>()};
  };
  spec.start = read_point("start", spec.start);
  spec.goal = read_point("goal", spec.goal);
  if (j.contains("threats")) {
    int k = 0;
    for (const json& t : j.at("threats"))
      spec.threats.push_back(parse_threat_agent(
          t, path + ".threats[" + std::to_string(k++) + "]"));
  }
  return spec;
}

// Environment overrides for scalar leaves: COVNAV_<SECTION>_<KEY>.
void apply_env_overrides(json& j) {
  static const std::vector<std::pair<const char*, std::vector<const char*>>>
      leaves = {
          {"grid", {"width", "height", "cell_size", "origin_x", "origin_y"}},
          {"world",
           {"scenario", "extent_x", "extent_y", "seed", "noise_sigma"}},
          {"perception",
           {"ground_band", "link_radius", "min_points", "min_height",
            "min_density", "min_volume"}},
          {"threat",
           {"vantage_k", "mass_floor", "gamma", "eye_height", "max_range"}},
          {"sensing",
           {"p_detect", "false_alarm", "sensor_range", "belief_diffusion"}},
          {"rewards",
           {"cover", "threat", "goal", "collision", "max_safe_height"}},
          {"cql", {"alpha", "gamma", "lr", "batch_size", "epochs"}},
          {"sim",
           {"dt", "goal_radius", "detect_persistence", "cover_util_threshold",
            "timeout_factor", "min_steps", "disable_threat"}},
          {"maps", {"goal_x", "goal_y"}},
          {"dataset",
           {"episodes", "straight_weight", "cover_weight", "random_weight"}},
          {"eval", {"trials", "jobs"}},
      };
  for (const auto& [section, keys] : leaves) {
    for (const char* key : keys) {
      std::string var = std::string("COVNAV_") + section + "_" + key;
      for (char& c : var) c = static_cast<char>(std::toupper(c));
      const char* value = std::getenv(var.c_str());
      if (!value) continue;
      json parsed;
      try {
        parsed = json::parse(value);
      } catch (...) {
        parsed = std::string(value);  // raw strings (e.g. scenario names)
      }
      j[section][key] = parsed;
    }
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, bool apply_env) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  if (!j.contains("version") || j.at("version") != "config.v1")
    throw ConfigError("config: missing or unsupported version (want config.v1)");
  if (apply_env) apply_env_overrides(j);

  reject_unknown(j, "config",
                 {"version", "grid", "world", "perception", "threat", "sensing",
                  "rewards", "cql", "sim", "maps", "dataset", "eval"});

  RunConfig c;

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    reject_unknown(g, "grid",
                   {"width", "height", "cell_size", "origin_x", "origin_y"});
    c.grid.width = get_int(g, "grid", "width", 1, 4096, c.grid.width);
    c.grid.height = get_int(g, "grid", "height", 1, 4096, c.grid.height);
    c.grid.cell_size = get_num(g, "grid", "cell_size", 1e-3, 1e3, c.grid.cell_size);
    c.grid.origin_x = get_num(g, "grid", "origin_x", -1e6, 1e6, c.grid.origin_x);
    c.grid.origin_y = get_num(g, "grid", "origin_y", -1e6, 1e6, c.grid.origin_y);
  }

  if (j.contains("world")) {
    const json& w = j.at("world");
    reject_unknown(w, "world",
                   {"scenario", "extent_x", "extent_y", "seed", "noise_sigma"});
    if (w.contains("scenario")) {
      if (!w.at("scenario").is_string())
        throw ConfigError("world.scenario: expected a string");
      try {
        c.world.scenario =
            scenario_from_string(w.at("scenario").get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("world.scenario: ") + e.what());
      }
    }
    c.world.extent_x = get_num(w, "world", "extent_x", 10.0, 1e4, c.world.extent_x);
    c.world.extent_y = get_num(w, "world", "extent_y", 10.0, 1e4, c.world.extent_y);
    c.world.seed = get_seed(w, "world", "seed", c.world.seed);
    c.world.noise_sigma = get_num(w, "world", "noise_sigma", 0.0, 1.0, c.world.noise_sigma);
  }

  if (j.contains("perception")) {
    const json& p = j.at("perception");
    reject_unknown(p, "perception",
                   {"ground_band", "link_radius", "min_points", "min_height",
                    "min_density", "min_volume"});
    c.perception.ground_band = get_num(p, "perception", "ground_band", 0.0, 5.0,
                                       c.perception.ground_band);
    c.perception.link_radius = get_num(p, "perception", "link_radius", 1e-3,
                                       10.0, c.perception.link_radius);
    c.perception.min_points =
        get_int(p, "perception", "min_points", 1, 1000000, c.perception.min_points);
    c.perception.min_height = get_num(p, "perception", "min_height", 0.0, 100.0,
                                      c.perception.min_height);
    c.perception.min_density = get_num(p, "perception", "min_density", 0.0, 1e6,
                                       c.perception.min_density);
    c.perception.min_volume = get_num(p, "perception", "min_volume", 0.0, 1e6,
                                      c.perception.min_volume);
  }

  if (j.contains("threat")) {
    const json& t = j.at("threat");
    reject_unknown(t, "threat",
                   {"vantage_k", "mass_floor", "gamma", "eye_height",
                    "max_range"});
    c.threat.vantage_k = get_int(t, "threat", "vantage_k", 0, 4096, c.threat.vantage_k);
    c.threat.mass_floor = get_num(t, "threat", "mass_floor", 0.0, 1.0, c.threat.mass_floor);
    c.threat.gamma = get_num(t, "threat", "gamma", 0.0, 1.0, c.threat.gamma);
    c.threat.vision.eye_height =
        get_num(t, "threat", "eye_height", 0.1, 100.0, c.threat.vision.eye_height);
    c.threat.vision.max_range =
        get_num(t, "threat", "max_range", 0.1, 1e4, c.threat.vision.max_range);
  }

  if (j.contains("sensing")) {
    const json& s = j.at("sensing");
    reject_unknown(s, "sensing",
                   {"p_detect", "false_alarm", "sensor_range",
                    "belief_diffusion"});
    c.sim.p_detect = get_num(s, "sensing", "p_detect", 1e-6, 1.0, c.sim.p_detect);
    c.sim.false_alarm = get_num(s, "sensing", "false_alarm", 0.0, 0.999, c.sim.false_alarm);
    c.sim.sensor_range = get_num(s, "sensing", "sensor_range", 0.1, 1e4, c.sim.sensor_range);
    c.sim.belief_diffusion =
        get_num(s, "sensing", "belief_diffusion", 0.0, 1.0, c.sim.belief_diffusion);
  }

  if (j.contains("rewards")) {
    const json& r = j.at("rewards");
    reject_unknown(r, "rewards",
                   {"cover", "threat", "goal", "collision", "max_safe_height"});
    c.rewards.cover = get_num(r, "rewards", "cover", 0.0, 1e6, c.rewards.cover);
    c.rewards.threat = get_num(r, "rewards", "threat", 0.0, 1e6, c.rewards.threat);
    c.rewards.goal = get_num(r, "rewards", "goal", 0.0, 1e6, c.rewards.goal);
    c.rewards.collision = get_num(r, "rewards", "collision", 0.0, 1e6, c.rewards.collision);
    c.rewards.max_safe_height =
        get_num(r, "rewards", "max_safe_height", 0.0, 100.0, c.rewards.max_safe_height);
  }

  if (j.contains("cql")) {
    const json& q = j.at("cql");
    reject_unknown(q, "cql", {"alpha", "gamma", "lr", "batch_size", "epochs"});
    c.cql.alpha = get_num(q, "cql", "alpha", 0.0, 1e3, c.cql.alpha);
    c.cql.gamma = get_num(q, "cql", "gamma", 0.0, 1.0, c.cql.gamma);
    c.cql.lr = get_num(q, "cql", "lr", 1e-12, 10.0, c.cql.lr);
    c.cql.batch_size = get_int(q, "cql", "batch_size", 1, 1 << 20, c.cql.batch_size);
    c.cql.epochs = get_int(q, "cql", "epochs", 0, 1 << 20, c.cql.epochs);
  }

  if (j.contains("sim")) {
    const json& s = j.at("sim");
    reject_unknown(s, "sim",
                   {"dt", "goal_radius", "detect_persistence",
                    "cover_util_threshold", "timeout_factor", "min_steps",
                    "disable_threat"});
    c.sim.dt = get_num(s, "sim", "dt", 1e-3, 10.0, c.sim.dt);
    c.sim.goal_radius = get_num(s, "sim", "goal_radius", 1e-3, 100.0, c.sim.goal_radius);
    c.sim.detect_persistence =
        get_int(s, "sim", "detect_persistence", 1, 100000, c.sim.detect_persistence);
    c.sim.cover_util_threshold =
        get_num(s, "sim", "cover_util_threshold", 0.0, 1.0, c.sim.cover_util_threshold);
    c.sim.timeout_factor = get_num(s, "sim", "timeout_factor", 0.1, 1e3, c.sim.timeout_factor);
    c.sim.min_steps = get_int(s, "sim", "min_steps", 1, 1 << 20, c.sim.min_steps);
    c.sim.disable_threat = get_bool(s, "sim", "disable_threat", c.sim.disable_threat);
  }

  if (j.contains("maps")) {
    const json& m = j.at("maps");
    reject_unknown(m, "maps", {"goal_x", "goal_y"});
    c.maps.goal_x = get_num(m, "maps", "goal_x", -1e6, 1e6, c.maps.goal_x);
    c.maps.goal_y = get_num(m, "maps", "goal_y", -1e6, 1e6, c.maps.goal_y);
  }

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    reject_unknown(d, "dataset",
                   {"episodes", "augmentations", "straight_weight",
                    "cover_weight", "random_weight", "scenarios"});
    c.dataset.episodes = get_int(d, "dataset", "episodes", 0, 1 << 20, c.dataset.episodes);
    c.dataset.straight_weight =
        get_num(d, "dataset", "straight_weight", 0.0, 1e3, c.dataset.straight_weight);
    c.dataset.cover_weight =
        get_num(d, "dataset", "cover_weight", 0.0, 1e3, c.dataset.cover_weight);
    c.dataset.random_weight =
        get_num(d, "dataset", "random_weight", 0.0, 1e3, c.dataset.random_weight);
    if (d.contains("augmentations")) {
      if (!d.at("augmentations").is_array())
        throw ConfigError("dataset.augmentations: expected an array");
      c.dataset.augmentations.clear();
      for (const json& a : d.at("augmentations")) {
        const std::string name = a.get<std::string>();
        try {
          parse_augmentation(name);
        } catch (const std::exception& e) {
          throw ConfigError(std::string("dataset.augmentations: ") + e.what());
        }
        c.dataset.augmentations.push_back(name);
      }
    }
    if (d.contains("scenarios")) {
      int k = 0;
      c.dataset.scenarios.clear();
      for (const json& s : d.at("scenarios"))
        c.dataset.scenarios.push_back(parse_scenario(
            s, "dataset.scenarios[" + std::to_string(k++) + "]"));
    }
  }

  if (j.contains("eval")) {
    const json& e = j.at("eval");
    reject_unknown(e, "eval", {"trials", "jobs", "scenarios"});
    c.eval.trials = get_int(e, "eval", "trials", 1, 100000, c.eval.trials);
    c.eval.jobs = get_int(e, "eval", "jobs", 1, 1024, c.eval.jobs);
    if (e.contains("scenarios")) {
      int k = 0;
      c.eval.scenarios.clear();
      for (const json& s : e.at("scenarios"))
        c.eval.scenarios.push_back(
            parse_scenario(s, "eval.scenarios[" + std::to_string(k++) + "]"));
    }
  }

  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str(), /*apply_env=*/true);
}

std::string run_config_to_json(const RunConfig& c) {
  ordered_json j;
  j["version"] = "config.v1";
  j["grid"] = {{"width", c.grid.width},
               {"height", c.grid.height},
               {"cell_size", c.grid.cell_size},
               {"origin_x", c.grid.origin_x},
               {"origin_y", c.grid.origin_y}};
  j["world"] = {{"scenario", to_string(c.world.scenario)},
                {"extent_x", c.world.extent_x},
                {"extent_y", c.world.extent_y},
                {"seed", c.world.seed},
                {"noise_sigma", c.world.noise_sigma}};
  j["perception"] = {{"ground_band", c.perception.ground_band},
                     {"link_radius", c.perception.link_radius},
                     {"min_points", c.perception.min_points},
                     {"min_height", c.perception.min_height},
                     {"min_density", c.perception.min_density},
                     {"min_volume", c.perception.min_volume}};
  j["threat"] = {{"vantage_k", c.threat.vantage_k},
                 {"mass_floor", c.threat.mass_floor},
                 {"gamma", c.threat.gamma},
                 {"eye_height", c.threat.vision.eye_height},
                 {"max_range", c.threat.vision.max_range}};
  j["sensing"] = {{"p_detect", c.sim.p_detect},
                  {"false_alarm", c.sim.false_alarm},
                  {"sensor_range", c.sim.sensor_range},
                  {"belief_diffusion", c.sim.belief_diffusion}};
  j["rewards"] = {{"cover", c.rewards.cover},
                  {"threat", c.rewards.threat},
                  {"goal", c.rewards.goal},
                  {"collision", c.rewards.collision},
                  {"max_safe_height", c.rewards.max_safe_height}};
  j["cql"] = {{"alpha", c.cql.alpha},
              {"gamma", c.cql.gamma},
              {"lr", c.cql.lr},
              {"batch_size", c.cql.batch_size},
              {"epochs", c.cql.epochs}};
  j["sim"] = {{"dt", c.sim.dt},
              {"goal_radius", c.sim.goal_radius},
              {"detect_persistence", c.sim.detect_persistence},
              {"cover_util_threshold", c.sim.cover_util_threshold},
              {"timeout_factor", c.sim.timeout_factor},
              {"min_steps", c.sim.min_steps},
              {"disable_threat", c.sim.disable_threat}};
  j["maps"] = {{"goal_x", c.maps.goal_x}, {"goal_y", c.maps.goal_y}};

  const auto scenario_json = [](const ScenarioSpec& s) {
    ordered_json out;
    out["name"] = s.name;
    out["world"] = {{"scenario", to_string(s.world_kind)},
                    {"extent_x", s.extent_x},
                    {"extent_y", s.extent_y},
                    {"seed", s.world_seed}};
    out["start"] = {s.start.x, s.start.y};
    out["goal"] = {s.goal.x, s.goal.y};
    out["threats"] = ordered_json::array();
    for (const ThreatAgentConfig& t : s.threats) {
      ordered_json tj;
      tj["cell"] = {t.cell.i, t.cell.j};
      tj["eye_height"] = t.eye_height;
      tj["max_range"] = t.max_range;
      tj["waypoints"] = ordered_json::array();
      for (CellIndex w : t.waypoints) tj["waypoints"].push_back({w.i, w.j});
      tj["patrol_period"] = t.patrol_period;
      out["threats"].push_back(tj);
    }
    return out;
  };

  j["dataset"] = {{"episodes", c.dataset.episodes},
                  {"augmentations", c.dataset.augmentations},
                  {"straight_weight", c.dataset.straight_weight},
                  {"cover_weight", c.dataset.cover_weight},
                  {"random_weight", c.dataset.random_weight}};
  j["dataset"]["scenarios"] = ordered_json::array();
  for (const ScenarioSpec& s : c.dataset.scenarios)
    j["dataset"]["scenarios"].push_back(scenario_json(s));
  j["eval"] = {{"trials", c.eval.trials}, {"jobs", c.eval.jobs}};
  j["eval"]["scenarios"] = ordered_json::array();
  for (const ScenarioSpec& s : c.eval.scenarios)
    j["eval"]["scenarios"].push_back(scenario_json(s));
  return j.dump(2) + "\n";
}

EpisodeSetup make_setup(const RunConfig& config, const ScenarioSpec& spec) {
  EpisodeSetup setup;
  setup.world = generate_world(spec.world_kind, spec.extent_x, spec.extent_y,
                               spec.world_seed);
  setup.grid = config.grid;
  setup.start = spec.start;
  setup.goal = spec.goal;
  setup.threats = spec.threats;
  setup.perception = config.perception;
  setup.threat = config.threat;
  setup.rewards = config.rewards;
  setup.sim = config.sim;
  setup.noise_sigma = config.world.noise_sigma;
  setup.cloud_seed = derive_seed(spec.world_seed, 0xB0);
  return setup;
}

}  // namespace covnav
