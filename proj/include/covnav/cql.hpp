#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covnav/dataset.hpp"

namespace covnav {

// Dense tabular action-value function.
struct QFunction {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> values;          // row-major [state][action], init 0
  std::vector<std::uint32_t> visits;   // dataset-action training visits

  QFunction() = default;
  QFunction(int states, int actions)
      : num_states(states),
        num_actions(actions),
        values(static_cast<std::size_t>(states) * actions, 0.0),
        visits(static_cast<std::size_t>(states) * actions, 0) {}

  double& at(int s, int a) { return values[static_cast<std::size_t>(s) * num_actions + a]; }
  double at(int s, int a) const { return values[static_cast<std::size_t>(s) * num_actions + a]; }

  double max_value(int s) const;
  // Argmax over all actions; ties break to the lowest index.
  int greedy_action(int s) const;
  // Argmax restricted to actions with allowed[a] != 0; at least one action
  // must be allowed (std::invalid_argument otherwise).
  int greedy_action(int s, const std::vector<std::uint8_t>& allowed) const;
};

struct CqlParams {
  double alpha = 0.2;   // conservatism weight
  double gamma = 0.95;  // discount
  double lr = 1e-4;     // step size
  int batch_size = 256;
  int epochs = 500;
};

struct TrainLogEntry {
  int epoch = 0;
  double td_loss = 0.0;   // mean squared TD error over the epoch
  double cql_gap = 0.0;   // mean (logsumexp - Q(s, a_data)) over the epoch
};

struct TrainResult {
  QFunction q;
  std::vector<TrainLogEntry> log;
};

// Minibatch semi-gradient training of the conservative objective
//   (Q(s,a) - (r + gamma * max_a' Q(s',a')))^2
//   + alpha * (logsumexp_a Q(s,a) - Q(s, a_data)),
// mean-reduced over the batch; terminal transitions bootstrap 0. Gradients
// accumulate over a batch and apply once. Deterministic in (data, seed,
// params).
TrainResult cql_train(const std::vector<Transition>& data, int num_states,
                      int num_actions, const CqlParams& params,
                      std::uint64_t seed);

// JSON, version "qfunction.v1". For the navigation state space the rows are
// keyed by the feature tuple "cover,threat,blocked,dist,bearing"; other
// table shapes use plain state indices. Zero-valued, unvisited rows are
// omitted.
void save_qfunction(const std::string& path, const QFunction& q);
QFunction load_qfunction(const std::string& path);

void save_train_log(const std::string& path,
                    const std::vector<TrainLogEntry>& log);

}  // namespace covnav
