// covnav: command-line front end for the covert-navigation pipeline.
//
// Subcommands: world, maps, dataset, train, eval, export-viz.
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 infeasible
// scenario.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "covnav/actions.hpp"
#include "covnav/config.hpp"
#include "covnav/errors.hpp"
#include "covnav/features.hpp"
#include "covnav/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

covnav::RunConfig load_config_checked(const std::string& path) {
  return covnav::load_run_config(path);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw covnav::IoError("cannot create directory " + dir + ": " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw covnav::IoError("cannot open for writing: " + path);
  return os;
}

// ---------------------------------------------------------------------------
// dataset: run scripted behaviour episodes and save the transition stream.
// ---------------------------------------------------------------------------

int cmd_dataset(const covnav::RunConfig& cfg, std::uint64_t seed,
                const std::string& out_dir) {
  ensure_dir(out_dir);
  if (cfg.dataset.scenarios.empty())
    throw covnav::ConfigError("dataset.scenarios: at least one scenario required");

  std::vector<covnav::EpisodeSetup> setups;
  for (const covnav::ScenarioSpec& s : cfg.dataset.scenarios)
    setups.push_back(covnav::make_setup(cfg, s));

  covnav::DatasetBuildParams params;
  params.episodes = cfg.dataset.episodes;
  params.augmentations = cfg.dataset.augmentations;
  params.straight_weight = cfg.dataset.straight_weight;
  params.cover_weight = cfg.dataset.cover_weight;
  params.random_weight = cfg.dataset.random_weight;
  params.keep_audit = false;
  params.hyperparameters_json =
      ordered_json{{"alpha", cfg.cql.alpha},
                   {"gamma", cfg.cql.gamma},
                   {"lr", cfg.cql.lr},
                   {"batch_size", cfg.cql.batch_size},
                   {"epochs", cfg.cql.epochs}}
          .dump();

  const covnav::Dataset ds = covnav::build_dataset(setups, params, seed);
  covnav::save_dataset(out_dir + "/dataset.bin", ds);
  std::cout << "dataset: " << ds.transitions.size() << " transitions -> "
            << out_dir << "/dataset.bin\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train: fit the Q table on a saved dataset.
// ---------------------------------------------------------------------------

int cmd_train(const covnav::RunConfig& cfg, const std::string& dataset_path,
              std::uint64_t seed, const std::string& out_dir) {
  ensure_dir(out_dir);
  const covnav::Dataset ds = covnav::load_dataset(dataset_path);
  if (ds.transitions.empty())
    throw covnav::ConfigError("dataset contains no transitions: " + dataset_path);

  const covnav::TrainResult result =
      covnav::cql_train(ds.transitions, covnav::kNumStates, covnav::kNumActions,
                        cfg.cql, seed);
  covnav::save_qfunction(out_dir + "/qfunction.json", result.q);
  covnav::save_train_log(out_dir + "/train_log.csv", result.log);
  const double final_td = result.log.empty() ? 0.0 : result.log.back().td_loss;
  std::cout << "train: " << ds.transitions.size() << " transitions, "
            << cfg.cql.epochs << " epochs, final TD loss " << final_td
            << " -> " << out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval: closed-loop trials of the trained policy against the baselines.
// ---------------------------------------------------------------------------

double pooled_metric(const covnav::SuiteResult& suite, const std::string& policy,
                     const std::string& metric) {
  double sum = 0.0;
  int n = 0;
  int n_success = 0;
  for (const covnav::TrialRow& row : suite.rows) {
    if (row.policy != policy) continue;
    if (metric == "success_rate") {
      sum += row.metrics.success ? 1.0 : 0.0;
      ++n;
    } else if (metric == "mean_exposure") {
      sum += row.metrics.exposure;
      ++n;
    } else if (metric == "mean_cover_util") {
      sum += row.metrics.cover_util;
      ++n;
    } else if (metric == "mean_time_s") {
      if (row.metrics.success) { sum += row.metrics.time_s; ++n_success; }
    } else if (metric == "mean_length_m") {
      if (row.metrics.success) { sum += row.metrics.length_m; ++n_success; }
    }
  }
  if (metric == "mean_time_s" || metric == "mean_length_m")
    return n_success > 0 ? sum / n_success : 0.0;
  return n > 0 ? sum / n : 0.0;
}

const char* relation(double reference, double other) {
  if (reference < other) return "<";
  if (reference > other) return ">";
  return "=";
}

int cmd_eval(const covnav::RunConfig& cfg, const std::string& q_path,
             std::uint64_t seed, const std::string& out_dir, bool write_traces) {
  ensure_dir(out_dir);
  if (cfg.eval.scenarios.empty())
    throw covnav::ConfigError("eval.scenarios: at least one scenario required");
  const covnav::QFunction q = covnav::load_qfunction(q_path);

  std::vector<covnav::EvalScenario> scenarios;
  for (const covnav::ScenarioSpec& s : cfg.eval.scenarios)
    scenarios.push_back({s.name, covnav::make_setup(cfg, s)});

  const covnav::Policy cql_policy{covnav::PolicyKind::cql, &q};
  const std::vector<covnav::NamedPolicy> policies = {
      {"cql", cql_policy, false},
      {"cql_no_threat", cql_policy, true},
      {"shortest_path", {covnav::PolicyKind::shortest_path, nullptr}, false},
      {"greedy_cover", {covnav::PolicyKind::greedy_cover, nullptr}, false},
      {"straight_line", {covnav::PolicyKind::straight_line, nullptr}, false},
      {"random_walk", {covnav::PolicyKind::random_walk, nullptr}, false},
  };

  std::vector<covnav::EpisodeResult> traces;
  const covnav::SuiteResult suite =
      covnav::run_suite(scenarios, policies, cfg.eval.trials, seed,
                        cfg.eval.jobs, write_traces ? &traces : nullptr);

  covnav::save_trials_csv(out_dir + "/trials.csv", suite);
  const std::vector<covnav::SummaryRow> summary = covnav::summarize(suite);
  covnav::save_summary_csv(out_dir + "/summary.csv", summary);

  if (write_traces) {
    ensure_dir(out_dir + "/traces");
    for (std::size_t k = 0; k < suite.rows.size(); ++k) {
      const covnav::TrialRow& row = suite.rows[k];
      covnav::EvalScenario* scenario = nullptr;
      for (covnav::EvalScenario& s : scenarios)
        if (s.name == row.scenario) scenario = &s;
      const covnav::TraceData trace = covnav::make_trace(
          traces[k], scenario->setup, row.policy, row.scenario);
      covnav::save_trace(out_dir + "/traces/" + row.policy + "_" +
                             row.scenario + "_" + std::to_string(row.trial) +
                             ".jsonl",
                         trace);
    }
  }

  // Machine-readable metric orderings of every baseline against the trained
  // policy, per scenario and pooled over all trials.
  const std::vector<std::string> metrics = {"success_rate", "mean_exposure",
                                            "mean_cover_util", "mean_time_s",
                                            "mean_length_m"};
  ordered_json cmp;
  cmp["version"] = "comparison.v1";
  cmp["reference"] = "cql";
  cmp["overall"] = ordered_json::object();
  for (const covnav::NamedPolicy& p : policies) {
    if (p.name == "cql") continue;
    ordered_json entry;
    for (const std::string& m : metrics) {
      const double ref = pooled_metric(suite, "cql", m);
      const double other = pooled_metric(suite, p.name, m);
      entry[m] = {{"cql", ref}, {p.name, other}, {"relation", relation(ref, other)}};
    }
    cmp["overall"][p.name] = entry;
  }
  cmp["scenarios"] = ordered_json::object();
  for (const covnav::EvalScenario& sc : scenarios) {
    ordered_json per;
    const auto find_summary = [&](const std::string& pol) {
      for (const covnav::SummaryRow& r : summary)
        if (r.policy == pol && r.scenario == sc.name) return r;
      return covnav::SummaryRow{};
    };
    const covnav::SummaryRow ref = find_summary("cql");
    for (const covnav::NamedPolicy& p : policies) {
      if (p.name == "cql") continue;
      const covnav::SummaryRow other = find_summary(p.name);
      ordered_json entry;
      entry["success_rate"] = {{"cql", ref.success_rate},
                               {p.name, other.success_rate},
                               {"relation", relation(ref.success_rate, other.success_rate)}};
      entry["mean_exposure"] = {{"cql", ref.mean_exposure},
                                {p.name, other.mean_exposure},
                                {"relation", relation(ref.mean_exposure, other.mean_exposure)}};
      entry["mean_cover_util"] = {{"cql", ref.mean_cover_util},
                                  {p.name, other.mean_cover_util},
                                  {"relation", relation(ref.mean_cover_util, other.mean_cover_util)}};
      per[p.name] = entry;
    }
    cmp["scenarios"][sc.name] = per;
  }
  open_out(out_dir + "/comparison.json") << cmp.dump(2) << "\n";

  std::cout << "eval: " << suite.rows.size() << " trials -> " << out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// export-viz: flatten grid maps / traces into plot-ready CSV.
// ---------------------------------------------------------------------------

int cmd_export_viz(const std::string& map_path, const std::string& trace_path,
                   const std::string& out_path) {
  if (map_path.empty() == trace_path.empty())
    throw covnav::ConfigError("export-viz: exactly one of --map / --trace required");

  std::ofstream os = open_out(out_path);
  char buf[256];
  if (!map_path.empty()) {
    std::ifstream is(map_path);
    if (!is) throw covnav::IoError("cannot open map file: " + map_path);
    os << "role,i,j,x,y,value\n";
    while (true) {
      is >> std::ws;
      if (is.peek() == EOF) break;
      const covnav::NamedGridMap named = covnav::read_gridmap(is);
      const covnav::GridSpec& spec = named.map.spec();
      for (int j = 0; j < spec.height; ++j)
        for (int i = 0; i < spec.width; ++i) {
          std::snprintf(buf, sizeof buf, "%s,%d,%d,%.9g,%.9g,%.9g\n",
                        named.role.c_str(), i, j, spec.center_x(i),
                        spec.center_y(j), named.map(i, j));
          os << buf;
        }
    }
  } else {
    const covnav::TraceData trace = covnav::load_trace(trace_path);
    os << "step,x,y,heading,v,omega,action,reward_total,detected,cell_i,cell_j\n";
    for (const covnav::StepRecord& s : trace.steps) {
      std::snprintf(buf, sizeof buf,
                    "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%.9g,%d,%d,%d\n", s.step,
                    s.x, s.y, s.heading, s.v, s.omega, s.action,
                    s.reward.total(), s.detected ? 1 : 0, s.cell.i, s.cell.j);
      os << buf;
    }
  }
  std::cout << "export-viz -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covert-navigation simulation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, cloud_path, dataset_path, q_path;
  std::string viz_map, viz_trace;
  std::uint64_t seed = 0;
  bool no_traces = false;

  // Per-subcommand scalar overrides (applied only when the flag is given).
  double ov_alpha = 0, ov_lr = 0, ov_goal_x = 0, ov_goal_y = 0;
  int ov_epochs = 0, ov_batch = 0, ov_trials = 0, ov_jobs = 0, ov_episodes = 0;
  std::string ov_scenario;
  std::uint64_t ov_world_seed = 0;

  CLI::App* world = app.add_subcommand("world", "generate a world and point cloud");
  world->add_option("--config", config_path, "run configuration (JSON)")->required();
  world->add_option("--out", out_dir, "output directory")->required();
  CLI::Option* w_scen = world->add_option("--scenario", ov_scenario, "override world.scenario");
  CLI::Option* w_seed = world->add_option("--world-seed", ov_world_seed, "override world.seed");

  CLI::App* maps = app.add_subcommand("maps", "build cover/height/goal maps from a cloud");
  maps->add_option("--config", config_path, "run configuration (JSON)")->required();
  maps->add_option("--cloud", cloud_path, "point cloud file (x y z per line)")->required();
  maps->add_option("--out", out_dir, "output directory")->required();
  CLI::Option* m_gx = maps->add_option("--goal-x", ov_goal_x, "override maps.goal_x");
  CLI::Option* m_gy = maps->add_option("--goal-y", ov_goal_y, "override maps.goal_y");

  CLI::App* dataset = app.add_subcommand("dataset", "generate an offline transition dataset");
  dataset->add_option("--config", config_path, "run configuration (JSON)")->required();
  dataset->add_option("--seed", seed, "master seed")->required();
  dataset->add_option("--out", out_dir, "output directory")->required();
  CLI::Option* d_ep = dataset->add_option("--episodes", ov_episodes, "override dataset.episodes");

  CLI::App* train = app.add_subcommand("train", "train the Q table on a dataset");
  train->add_option("--config", config_path, "run configuration (JSON)")->required();
  train->add_option("--dataset", dataset_path, "dataset file")->required();
  train->add_option("--seed", seed, "master seed")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  CLI::Option* t_alpha = train->add_option("--alpha", ov_alpha, "override cql.alpha");
  CLI::Option* t_lr = train->add_option("--lr", ov_lr, "override cql.lr");
  CLI::Option* t_epochs = train->add_option("--epochs", ov_epochs, "override cql.epochs");
  CLI::Option* t_batch = train->add_option("--batch-size", ov_batch, "override cql.batch_size");

  CLI::App* eval = app.add_subcommand("eval", "closed-loop trials against the baselines");
  eval->add_option("--config", config_path, "run configuration (JSON)")->required();
  eval->add_option("--qfunction", q_path, "trained Q table file")->required();
  eval->add_option("--seed", seed, "master seed")->required();
  eval->add_option("--out", out_dir, "output directory")->required();
  CLI::Option* e_trials = eval->add_option("--trials", ov_trials, "override eval.trials");
  CLI::Option* e_jobs = eval->add_option("--jobs", ov_jobs, "override eval.jobs (parallel trials)");
  eval->add_flag("--no-traces", no_traces, "skip per-trial trace files");

  CLI::App* viz = app.add_subcommand("export-viz", "flatten a map or trace into CSV");
  viz->add_option("--map", viz_map, "grid map file to flatten");
  viz->add_option("--trace", viz_trace, "trace file to flatten");
  viz->add_option("--out", out_dir, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (world->parsed()) {
      covnav::RunConfig cfg = load_config_checked(config_path);
      if (*w_scen) cfg.world.scenario = covnav::scenario_from_string(ov_scenario);
      if (*w_seed) cfg.world.seed = ov_world_seed;
      ensure_dir(out_dir);
      const covnav::World w = covnav::generate_world(
          cfg.world.scenario, cfg.world.extent_x, cfg.world.extent_y, cfg.world.seed);
      const covnav::PointCloud cloud = covnav::sample_point_cloud(
          w, cfg.world.noise_sigma, covnav::derive_seed(cfg.world.seed, 0xB0));
      covnav::save_world(out_dir + "/world.json", w);
      covnav::save_point_cloud(out_dir + "/cloud.xyz", cloud);
      std::cout << "world: " << w.objects.size() << " objects, "
                << cloud.points.size() << " points -> " << out_dir << "\n";
      return 0;
    }
    if (maps->parsed()) {
      covnav::RunConfig cfg = load_config_checked(config_path);
      if (*m_gx) cfg.maps.goal_x = ov_goal_x;
      if (*m_gy) cfg.maps.goal_y = ov_goal_y;
      // Re-dispatch through the shared implementation with overrides applied.
      ensure_dir(out_dir);
      const covnav::PointCloud cloud = covnav::load_point_cloud(cloud_path);
      const std::vector<covnav::Cluster> clusters =
          covnav::euclidean_cluster(cloud, cfg.perception);
      const std::vector<std::uint32_t> cover_idx =
          covnav::cover_points(cloud, clusters, cfg.perception);
      const covnav::CoverMap cover = covnav::build_cover_map(cloud, cover_idx, cfg.grid);
      const covnav::HeightMap height = covnav::build_height_map(cloud, cfg.grid);
      const covnav::GoalMap goal =
          covnav::build_goal_map(cfg.grid, cfg.maps.goal_x, cfg.maps.goal_y);
      covnav::save_gridmap(out_dir + "/cover.grid", cover, "cover");
      covnav::save_gridmap(out_dir + "/height.grid", height, "height");
      {
        std::ofstream os = open_out(out_dir + "/goal.grid");
        covnav::write_gridmap(os, goal.distance, "goal_distance");
        covnav::write_gridmap(os, goal.angle, "goal_angle");
      }
      covnav::save_cluster_labels(out_dir + "/labels.txt", cloud, clusters);
      std::cout << "maps: " << clusters.size() << " clusters, "
                << cover_idx.size() << " cover points -> " << out_dir << "\n";
      return 0;
    }
    if (dataset->parsed()) {
      covnav::RunConfig cfg = load_config_checked(config_path);
      if (*d_ep) cfg.dataset.episodes = ov_episodes;
      return cmd_dataset(cfg, seed, out_dir);
    }
    if (train->parsed()) {
      covnav::RunConfig cfg = load_config_checked(config_path);
      if (*t_alpha) cfg.cql.alpha = ov_alpha;
      if (*t_lr) cfg.cql.lr = ov_lr;
      if (*t_epochs) cfg.cql.epochs = ov_epochs;
      if (*t_batch) cfg.cql.batch_size = ov_batch;
      return cmd_train(cfg, dataset_path, seed, out_dir);
    }
    if (eval->parsed()) {
      covnav::RunConfig cfg = load_config_checked(config_path);
      if (*e_trials) cfg.eval.trials = ov_trials;
      if (*e_jobs) cfg.eval.jobs = ov_jobs;
      return cmd_eval(cfg, q_path, seed, out_dir, !no_traces);
    }
    if (viz->parsed()) return cmd_export_viz(viz_map, viz_trace, out_dir);
  } catch (const covnav::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const covnav::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  } catch (const covnav::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
