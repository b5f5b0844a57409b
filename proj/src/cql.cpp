#include "covnav/cql.hpp"
#include "covnav/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "covnav/features.hpp"
#include "covnav/rng.hpp"

namespace covnav {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Max-shifted logsumexp plus the softmax weights (gradient of the lse).
double logsumexp_row(const double* q, int n, std::vector<double>& softmax) {
  double m = q[0];
  for (int a = 1; a < n; ++a) m = std::max(m, q[a]);
  double sum = 0.0;
  for (int a = 0; a < n; ++a) {
    softmax[a] = std::exp(q[a] - m);
    sum += softmax[a];
  }
  for (int a = 0; a < n; ++a) softmax[a] /= sum;
  return m + std::log(sum);
}

}  // namespace

double QFunction::max_value(int s) const {
  const double* row = &values[static_cast<std::size_t>(s) * num_actions];
  double m = row[0];
  for (int a = 1; a < num_actions; ++a) m = std::max(m, row[a]);
  return m;
}

int QFunction::greedy_action(int s) const {
  const double* row = &values[static_cast<std::size_t>(s) * num_actions];
  int best = 0;
  for (int a = 1; a < num_actions; ++a)
    if (row[a] > row[best]) best = a;
  return best;
}

int QFunction::greedy_action(int s,
                             const std::vector<std::uint8_t>& allowed) const {
  if (static_cast<int>(allowed.size()) != num_actions)
    throw std::invalid_argument("allowed mask size mismatch");
  const double* row = &values[static_cast<std::size_t>(s) * num_actions];
  int best = -1;
  for (int a = 0; a < num_actions; ++a) {
    if (!allowed[a]) continue;
    if (best < 0 || row[a] > row[best]) best = a;
  }
  if (best < 0) throw std::invalid_argument("no action allowed");
  return best;
}

TrainResult cql_train(const std::vector<Transition>& data, int num_states,
                      int num_actions, const CqlParams& params,
                      std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("cql_train: empty dataset");
  if (params.batch_size <= 0 || params.epochs < 0 || params.lr <= 0.0 ||
      params.gamma < 0.0 || params.gamma > 1.0 || params.alpha < 0.0)
    throw std::invalid_argument("cql_train: bad hyperparameters");
  for (const Transition& t : data)
    if (static_cast<int>(t.state) >= num_states ||
        static_cast<int>(t.next_state) >= num_states ||
        static_cast<int>(t.action) >= num_actions)
      throw std::invalid_argument("cql_train: transition index out of range");

  TrainResult res;
  res.q = QFunction(num_states, num_actions);
  QFunction& q = res.q;
  Rng rng(derive_seed(seed, 0x7A));

  const std::size_t n = data.size();
  const int batches_per_epoch =
      static_cast<int>((n + params.batch_size - 1) / params.batch_size);
  std::vector<double> softmax(num_actions);
  // Accumulated sparse gradient, applied once per batch in sample order.
  std::vector<std::pair<std::size_t, double>> grad;
  grad.reserve(static_cast<std::size_t>(params.batch_size) * (num_actions + 2));

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    double td_sum = 0.0, gap_sum = 0.0;
    std::size_t sample_count = 0;
    for (int b = 0; b < batches_per_epoch; ++b) {
      grad.clear();
      const double inv_batch = 1.0 / params.batch_size;
      for (int k = 0; k < params.batch_size; ++k) {
        const Transition& t = data[rng.uniform_index(n)];
        const std::size_t row = static_cast<std::size_t>(t.state) * num_actions;
        const double target =
            t.terminal ? t.reward
                       : t.reward + params.gamma * q.max_value(t.next_state);
        const double td = q.at(t.state, t.action) - target;
        grad.emplace_back(row + t.action, 2.0 * td * inv_batch);
        td_sum += td * td;

        if (params.alpha > 0.0) {
          const double lse =
              logsumexp_row(&q.values[row], num_actions, softmax);
          gap_sum += lse - q.at(t.state, t.action);
          for (int a = 0; a < num_actions; ++a)
            grad.emplace_back(row + a,
                              params.alpha * softmax[a] * inv_batch);
          grad.emplace_back(row + t.action, -params.alpha * inv_batch);
        } else {
          // Log the gap even when it is not optimized.
          const double lse =
              logsumexp_row(&q.values[row], num_actions, softmax);
          gap_sum += lse - q.at(t.state, t.action);
        }
        ++q.visits[row + t.action];
        ++sample_count;
      }
      for (const auto& [idx, g] : grad) q.values[idx] -= params.lr * g;
    }
    res.log.push_back({epoch, td_sum / sample_count, gap_sum / sample_count});
  }
  return res;
}

void save_qfunction(const std::string& path, const QFunction& q) {
  ordered_json j;
  j["version"] = "qfunction.v1";
  j["num_states"] = q.num_states;
  j["num_actions"] = q.num_actions;
  const bool feature_keys = (q.num_states == kNumStates);
  j["key_format"] = feature_keys ? "cover,threat,blocked,dist,bearing" : "state";
  ordered_json rows = ordered_json::object();
  for (int s = 0; s < q.num_states; ++s) {
    const std::size_t row = static_cast<std::size_t>(s) * q.num_actions;
    bool keep = false;
    for (int a = 0; a < q.num_actions; ++a)
      if (q.values[row + a] != 0.0 || q.visits[row + a] != 0) keep = true;
    if (!keep) continue;
    std::string key;
    if (feature_keys) {
      const StateFeatures f = features_from_index(s);
      key = std::to_string(f.cover_bucket) + "," +
            std::to_string(f.threat_bucket) + "," +
            std::to_string(f.height_blocked ? 1 : 0) + "," +
            std::to_string(f.goal_dist_bucket) + "," +
            std::to_string(f.goal_bearing_bucket);
    } else {
      key = std::to_string(s);
    }
    ordered_json entry;
    entry["q"] = std::vector<double>(q.values.begin() + row,
                                     q.values.begin() + row + q.num_actions);
    entry["visits"] = std::vector<std::uint32_t>(
        q.visits.begin() + row, q.visits.begin() + row + q.num_actions);
    rows[key] = entry;
  }
  j["rows"] = rows;
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for write: " + path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed: " + path);
}

QFunction load_qfunction(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  json j = json::parse(ss.str());
  if (!j.contains("version") || j["version"] != "qfunction.v1")
    throw IoError("qfunction: unsupported version");
  QFunction q(j.at("num_states").get<int>(), j.at("num_actions").get<int>());
  const bool feature_keys = (j.at("key_format") != "state");
  for (const auto& [key, entry] : j.at("rows").items()) {
    int s = 0;
    if (feature_keys) {
      StateFeatures f;
      int blocked = 0;
      if (std::sscanf(key.c_str(), "%d,%d,%d,%d,%d", &f.cover_bucket,
                      &f.threat_bucket, &blocked, &f.goal_dist_bucket,
                      &f.goal_bearing_bucket) != 5)
        throw IoError("qfunction: bad row key " + key);
      f.height_blocked = blocked != 0;
      s = state_index(f);
    } else {
      s = std::stoi(key);
    }
    if (s < 0 || s >= q.num_states)
      throw IoError("qfunction: row key out of range");
    const auto vals = entry.at("q").get<std::vector<double>>();
    const auto vis = entry.at("visits").get<std::vector<std::uint32_t>>();
    if (static_cast<int>(vals.size()) != q.num_actions ||
        static_cast<int>(vis.size()) != q.num_actions)
      throw IoError("qfunction: row width mismatch");
    const std::size_t row = static_cast<std::size_t>(s) * q.num_actions;
    std::copy(vals.begin(), vals.end(), q.values.begin() + row);
    std::copy(vis.begin(), vis.end(), q.visits.begin() + row);
  }
  return q;
}

void save_train_log(const std::string& path,
                    const std::vector<TrainLogEntry>& log) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for write: " + path);
  os << "epoch,td_loss,cql_gap\n";
  char buf[96];
  for (const TrainLogEntry& e : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", e.epoch, e.td_loss,
                  e.cql_gap);
    os << buf;
  }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace covnav
