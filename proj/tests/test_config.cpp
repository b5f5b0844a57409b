// Run-configuration tests: defaults, strict key/type/range validation with
// path-qualified errors, environment-variable overrides, emitter round
// trips, and the scenario-to-episode wiring.

#include "covnav/config.hpp"

#include <cstdlib>
#include <string>

#include <doctest.h>

#include "covnav/errors.hpp"
#include "covnav/rng.hpp"
#include "test_util.hpp"

using namespace covnav;
using namespace testutil;

namespace {

constexpr const char* kMinimal = "{\"version\":\"config.v1\"}";

// Sets an environment variable for the current scope only.
struct ScopedEnv {
  std::string name;
  ScopedEnv(const std::string& n, const std::string& value) : name(n) {
    setenv(name.c_str(), value.c_str(), 1);
  }
  ~ScopedEnv() { unsetenv(name.c_str()); }
};

}  // namespace

TEST_CASE("a minimal document yields the documented defaults") {
  const RunConfig c = parse_run_config(kMinimal, false);

  CHECK(c.grid.width == 50);
  CHECK(c.grid.height == 50);
  CHECK(c.grid.cell_size == 1.0);
  CHECK(c.grid.origin_x == 0.0);
  CHECK(c.grid.origin_y == 0.0);

  CHECK(c.world.scenario == Scenario::mixed);
  CHECK(c.world.extent_x == 50.0);
  CHECK(c.world.extent_y == 50.0);
  CHECK(c.world.seed == 1);
  CHECK(c.world.noise_sigma == 0.02);

  CHECK(c.perception.ground_band == 0.15);
  CHECK(c.perception.link_radius == 0.6);
  CHECK(c.perception.min_points == 8);
  CHECK(c.perception.min_height == 0.5);
  CHECK(c.perception.min_density == 5.0);
  CHECK(c.perception.min_volume == 0.1);

  CHECK(c.threat.vantage_k == 16);
  CHECK(c.threat.mass_floor == 1e-3);
  CHECK(c.threat.gamma == 0.95);
  CHECK(c.threat.vision.eye_height == 1.5);
  CHECK(c.threat.vision.max_range == 15.0);

  CHECK(c.rewards.cover == 1.0);
  CHECK(c.rewards.threat == 2.0);
  CHECK(c.rewards.goal == 5.0);
  CHECK(c.rewards.collision == 10.0);
  CHECK(c.rewards.max_safe_height == 0.3);

  CHECK(c.cql.alpha == 0.2);
  CHECK(c.cql.gamma == 0.95);
  CHECK(c.cql.lr == 1e-4);
  CHECK(c.cql.batch_size == 256);
  CHECK(c.cql.epochs == 500);

  CHECK(c.sim.dt == 0.2);
  CHECK(c.sim.goal_radius == 0.5);
  CHECK(c.sim.detect_persistence == 3);
  CHECK(c.sim.cover_util_threshold == 0.5);
  CHECK(c.sim.timeout_factor == 4.0);
  CHECK(c.sim.min_steps == 200);
  CHECK_FALSE(c.sim.disable_threat);
  CHECK(c.sim.p_detect == 0.9);
  CHECK(c.sim.false_alarm == 0.02);
  CHECK(c.sim.sensor_range == 15.0);
  CHECK(c.sim.belief_diffusion == 0.05);

  CHECK(c.maps.goal_x == 45.0);
  CHECK(c.maps.goal_y == 25.0);

  CHECK(c.dataset.episodes == 30);
  CHECK(c.dataset.augmentations ==
        std::vector<std::string>{"rot90", "rot180", "rot270"});
  CHECK(c.dataset.straight_weight == 0.35);
  CHECK(c.dataset.cover_weight == 0.35);
  CHECK(c.dataset.random_weight == 0.30);
  CHECK(c.dataset.scenarios.empty());

  CHECK(c.eval.trials == 10);
  CHECK(c.eval.jobs == 1);
  CHECK(c.eval.scenarios.empty());
}

TEST_CASE("the version gate and JSON shape are enforced") {
  CHECK_THROWS_AS(parse_run_config("{}", false), ConfigError);
  CHECK_THROWS_AS(parse_run_config("{\"version\":\"config.v0\"}", false),
                  ConfigError);
  CHECK_THROWS_AS(parse_run_config("not json at all", false), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[1,2,3]", false), ConfigError);
}

TEST_CASE("unknown keys are rejected with their full path") {
  CHECK_THROWS_WITH_AS(
      parse_run_config("{\"version\":\"config.v1\",\"grdi\":{}}", false),
      "config: unknown key 'grdi'", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_run_config("{\"version\":\"config.v1\",\"cql\":{\"alhpa\":1}}",
                       false),
      "cql: unknown key 'alhpa'", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_run_config("{\"version\":\"config.v1\",\"eval\":{\"scenarios\":"
                       "[{\"name\":\"x\",\"stat\":1}]}}",
                       false),
      "eval.scenarios[0]: unknown key 'stat'", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_run_config("{\"version\":\"config.v1\",\"dataset\":{\"scenarios\":"
                       "[{\"name\":\"x\",\"threats\":[{\"cell\":[1,2],"
                       "\"speed\":3}]}]}}",
                       false),
      "dataset.scenarios[0].threats[0]: unknown key 'speed'", ConfigError);
}

TEST_CASE("type and range violations name the offending path") {
  const auto reject = [](const std::string& body, const char* needle) {
    const std::string doc = "{\"version\":\"config.v1\"," + body + "}";
    CHECK_THROWS_WITH_AS(parse_run_config(doc, false),
                         doctest::Contains(needle), ConfigError);
  };
  reject("\"cql\":{\"lr\":0}", "cql.lr");
  reject("\"grid\":{\"width\":0}", "grid.width");
  reject("\"grid\":{\"width\":2.5}", "grid.width: expected an integer");
  reject("\"sim\":{\"dt\":\"fast\"}", "sim.dt: expected a number");
  reject("\"sim\":{\"disable_threat\":1}",
         "sim.disable_threat: expected a boolean");
  reject("\"world\":{\"seed\":-3}", "world.seed");
  reject("\"world\":{\"scenario\":\"desert\"}", "world.scenario");
  reject("\"world\":{\"extent_x\":5}", "world.extent_x");
  reject("\"threat\":{\"gamma\":1.5}", "threat.gamma");
  reject("\"sensing\":{\"p_detect\":0}", "sensing.p_detect");
  reject("\"rewards\":{\"collision\":-1}", "rewards.collision");
  reject("\"dataset\":{\"augmentations\":[\"flip\"]}",
         "dataset.augmentations");
  reject("\"dataset\":{\"augmentations\":\"rot90\"}",
         "dataset.augmentations: expected an array");
  reject("\"eval\":{\"trials\":0}", "eval.trials");
  reject("\"eval\":{\"scenarios\":[{\"threats\":[]}]}",
         "eval.scenarios[0].name: required string");
  reject("\"eval\":{\"scenarios\":[{\"name\":\"x\",\"threats\":[{}]}]}",
         ".cell: expected [i, j]");
  reject("\"eval\":{\"scenarios\":[{\"name\":\"x\",\"start\":[1]}]}",
         ".start: expected [x, y]");
}

TEST_CASE("values from every section are applied") {
  const std::string doc = R"({
    "version": "config.v1",
    "grid": {"width": 32, "height": 24, "cell_size": 0.5,
             "origin_x": -4.0, "origin_y": 6.0},
    "world": {"scenario": "urban", "extent_x": 20, "extent_y": 30,
              "seed": 7, "noise_sigma": 0.05},
    "perception": {"ground_band": 0.2, "link_radius": 0.8, "min_points": 5,
                   "min_height": 0.6, "min_density": 4.0, "min_volume": 0.2},
    "threat": {"vantage_k": 8, "mass_floor": 0.01, "gamma": 0.9,
               "eye_height": 1.2, "max_range": 9.0},
    "sensing": {"p_detect": 0.7, "false_alarm": 0.01, "sensor_range": 12.0,
                "belief_diffusion": 0.1},
    "rewards": {"cover": 2, "threat": 3, "goal": 4, "collision": 5,
                "max_safe_height": 0.4},
    "cql": {"alpha": 0.5, "gamma": 0.9, "lr": 0.3, "batch_size": 32,
            "epochs": 10},
    "sim": {"dt": 0.1, "goal_radius": 1.0, "detect_persistence": 2,
            "cover_util_threshold": 0.6, "timeout_factor": 2.0,
            "min_steps": 50, "disable_threat": true},
    "maps": {"goal_x": 10.0, "goal_y": 12.0},
    "dataset": {"episodes": 3, "augmentations": ["rot180", "shift:1,-2"],
                "straight_weight": 1.0, "cover_weight": 0.0,
                "random_weight": 0.0,
                "scenarios": [{"name": "train", "world": {"scenario": "forest",
                               "extent_x": 24, "extent_y": 24, "seed": 4},
                               "start": [2.0, 3.0], "goal": [20.0, 21.0],
                               "threats": [{"cell": [5, 6], "eye_height": 2.0,
                                            "max_range": 11.0,
                                            "waypoints": [[5, 10], [9, 10]],
                                            "patrol_period": 4}]}]},
    "eval": {"trials": 2, "jobs": 4,
             "scenarios": [{"name": "test", "start": [1.0, 1.0],
                            "goal": [30.0, 30.0]}]}
  })";
  const RunConfig c = parse_run_config(doc, false);

  CHECK(c.grid.width == 32);
  CHECK(c.grid.height == 24);
  CHECK(c.grid.cell_size == 0.5);
  CHECK(c.grid.origin_x == -4.0);
  CHECK(c.grid.origin_y == 6.0);
  CHECK(c.world.scenario == Scenario::urban);
  CHECK(c.world.extent_x == 20.0);
  CHECK(c.world.seed == 7);
  CHECK(c.world.noise_sigma == 0.05);
  CHECK(c.perception.min_points == 5);
  CHECK(c.perception.min_volume == 0.2);
  CHECK(c.threat.vantage_k == 8);
  CHECK(c.threat.mass_floor == 0.01);
  CHECK(c.threat.gamma == 0.9);
  CHECK(c.threat.vision.eye_height == 1.2);
  CHECK(c.threat.vision.max_range == 9.0);
  CHECK(c.sim.p_detect == 0.7);
  CHECK(c.sim.false_alarm == 0.01);
  CHECK(c.sim.sensor_range == 12.0);
  CHECK(c.sim.belief_diffusion == 0.1);
  CHECK(c.rewards.cover == 2.0);
  CHECK(c.rewards.max_safe_height == 0.4);
  CHECK(c.cql.alpha == 0.5);
  CHECK(c.cql.lr == 0.3);
  CHECK(c.cql.batch_size == 32);
  CHECK(c.cql.epochs == 10);
  CHECK(c.sim.dt == 0.1);
  CHECK(c.sim.goal_radius == 1.0);
  CHECK(c.sim.detect_persistence == 2);
  CHECK(c.sim.cover_util_threshold == 0.6);
  CHECK(c.sim.timeout_factor == 2.0);
  CHECK(c.sim.min_steps == 50);
  CHECK(c.sim.disable_threat);
  CHECK(c.maps.goal_x == 10.0);
  CHECK(c.maps.goal_y == 12.0);
  CHECK(c.dataset.episodes == 3);
  CHECK(c.dataset.augmentations ==
        std::vector<std::string>{"rot180", "shift:1,-2"});
  CHECK(c.dataset.straight_weight == 1.0);

  REQUIRE(c.dataset.scenarios.size() == 1);
  const ScenarioSpec& train = c.dataset.scenarios[0];
  CHECK(train.name == "train");
  CHECK(train.world_kind == Scenario::forest);
  CHECK(train.extent_x == 24.0);
  CHECK(train.world_seed == 4);
  CHECK(train.start.x == 2.0);
  CHECK(train.goal.y == 21.0);
  REQUIRE(train.threats.size() == 1);
  CHECK(train.threats[0].cell == CellIndex{5, 6});
  CHECK(train.threats[0].eye_height == 2.0);
  CHECK(train.threats[0].max_range == 11.0);
  REQUIRE(train.threats[0].waypoints.size() == 2);
  CHECK(train.threats[0].waypoints[1] == CellIndex{9, 10});
  CHECK(train.threats[0].patrol_period == 4);

  CHECK(c.eval.trials == 2);
  CHECK(c.eval.jobs == 4);
  REQUIRE(c.eval.scenarios.size() == 1);
  CHECK(c.eval.scenarios[0].name == "test");
  CHECK(c.eval.scenarios[0].world_kind == Scenario::mixed);  // default kept
}

TEST_CASE("emitting and re-parsing a config is a fixed point") {
  SUBCASE("defaults") {
    const RunConfig c = parse_run_config(kMinimal, false);
    const std::string text = run_config_to_json(c);
    const RunConfig back = parse_run_config(text, false);
    CHECK(run_config_to_json(back) == text);
  }
  SUBCASE("fully populated document") {
    RunConfig c = parse_run_config(kMinimal, false);
    c.grid.width = 18;
    c.world.scenario = Scenario::forest;
    c.world.seed = 1234567;
    c.threat.vantage_k = 3;
    c.cql.lr = 0.125;
    c.sim.disable_threat = true;
    ScenarioSpec spec;
    spec.name = "ambush";
    spec.world_kind = Scenario::urban;
    spec.world_seed = 9;
    spec.start = {1.25, 2.5};
    spec.goal = {10.0, 11.0};
    ThreatAgentConfig agent;
    agent.cell = {3, 4};
    agent.waypoints = {{3, 8}, {6, 8}};
    agent.patrol_period = 7;
    spec.threats = {agent};
    c.eval.scenarios = {spec};
    c.dataset.scenarios = {spec};

    const std::string text = run_config_to_json(c);
    const RunConfig back = parse_run_config(text, false);
    CHECK(run_config_to_json(back) == text);
    REQUIRE(back.eval.scenarios.size() == 1);
    CHECK(back.eval.scenarios[0].name == "ambush");
    CHECK(back.eval.scenarios[0].threats[0].waypoints[1] == CellIndex{6, 8});
    CHECK(back.cql.lr == 0.125);
  }
}

TEST_CASE("environment variables override scalars before validation") {
  SUBCASE("overrides apply and create missing sections") {
    ScopedEnv lr("COVNAV_CQL_LR", "0.25");
    ScopedEnv width("COVNAV_GRID_WIDTH", "16");
    ScopedEnv kind("COVNAV_WORLD_SCENARIO", "urban");
    ScopedEnv ablate("COVNAV_SIM_DISABLE_THREAT", "true");
    ScopedEnv pd("COVNAV_SENSING_P_DETECT", "0.55");
    const RunConfig c = parse_run_config(kMinimal, true);
    CHECK(c.cql.lr == 0.25);
    CHECK(c.grid.width == 16);
    CHECK(c.world.scenario == Scenario::urban);
    CHECK(c.sim.disable_threat);
    CHECK(c.sim.p_detect == 0.55);
  }
  SUBCASE("the file value loses to the environment") {
    ScopedEnv lr("COVNAV_CQL_LR", "0.5");
    const RunConfig c = parse_run_config(
        "{\"version\":\"config.v1\",\"cql\":{\"lr\":0.1}}", true);
    CHECK(c.cql.lr == 0.5);
  }
  SUBCASE("overrides are ignored when disabled") {
    ScopedEnv lr("COVNAV_CQL_LR", "0.25");
    const RunConfig c = parse_run_config(kMinimal, false);
    CHECK(c.cql.lr == 1e-4);
  }
  SUBCASE("an out-of-range override fails validation with its path") {
    ScopedEnv lr("COVNAV_CQL_LR", "99");
    CHECK_THROWS_WITH_AS(parse_run_config(kMinimal, true),
                         doctest::Contains("cql.lr"), ConfigError);
  }
}

TEST_CASE("configs load from disk with overrides applied") {
  TempDir dir;
  const std::string path = dir.file("run.json");
  write_file(path, "{\"version\":\"config.v1\",\"eval\":{\"trials\":4}}");
  SUBCASE("plain load") {
    const RunConfig c = load_run_config(path);
    CHECK(c.eval.trials == 4);
  }
  SUBCASE("with an environment override on top") {
    ScopedEnv trials("COVNAV_EVAL_TRIALS", "6");
    const RunConfig c = load_run_config(path);
    CHECK(c.eval.trials == 6);
  }
  SUBCASE("missing files raise an I/O error") {
    CHECK_THROWS_AS(load_run_config(dir.file("absent.json")), IoError);
  }
}

TEST_CASE("scenario specs materialize into episode setups") {
  RunConfig c = parse_run_config(kMinimal, false);
  c.grid = GridSpec{24, 24, 1.0, 0.0, 0.0};
  c.perception.min_points = 6;
  c.threat.vantage_k = 4;
  c.rewards.cover = 3.0;
  c.sim.dt = 0.25;
  c.world.noise_sigma = 0.03;

  ScenarioSpec spec;
  spec.name = "yard";
  spec.world_kind = Scenario::urban;
  spec.extent_x = 24.0;
  spec.extent_y = 24.0;
  spec.world_seed = 5;
  spec.start = {2.5, 2.5};
  spec.goal = {21.5, 21.5};
  ThreatAgentConfig agent;
  agent.cell = {12, 12};
  spec.threats = {agent};

  const EpisodeSetup setup = make_setup(c, spec);
  CHECK(setup.grid.width == 24);
  CHECK(setup.grid.cell_size == 1.0);
  CHECK(setup.start.x == 2.5);
  CHECK(setup.goal.y == 21.5);
  REQUIRE(setup.threats.size() == 1);
  CHECK(setup.threats[0].cell == CellIndex{12, 12});
  CHECK(setup.perception.min_points == 6);
  CHECK(setup.threat.vantage_k == 4);
  CHECK(setup.rewards.cover == 3.0);
  CHECK(setup.sim.dt == 0.25);
  CHECK(setup.noise_sigma == 0.03);
  CHECK(setup.cloud_seed == derive_seed(5, 0xB0));
  CHECK(setup.world.seed == 5);
  CHECK(setup.world.extent_x == 24.0);
  CHECK(!setup.world.objects.empty());

  // Same scenario, same world: the builder is deterministic.
  const EpisodeSetup again = make_setup(c, spec);
  CHECK(again.world.objects.size() == setup.world.objects.size());
  CHECK(again.cloud_seed == setup.cloud_seed);
}
