#pragma once

#include <stdexcept>

namespace covnav {

// Discrete command grid: 5 forward speeds x 5 turn rates.
inline constexpr int kNumLinear = 5;
inline constexpr int kNumAngular = 5;
inline constexpr int kNumActions = kNumLinear * kNumAngular;
inline constexpr double kMaxLinear = 2.0;    // m/s
inline constexpr double kMaxAngular = 1.5;   // rad/s

struct ActionCommand {
  double v = 0.0;      // m/s, [0, kMaxLinear]
  double omega = 0.0;  // rad/s, [-kMaxAngular, kMaxAngular]
};

inline double linear_value(int iv) { return 0.5 * iv; }
inline double angular_value(int iw) { return -kMaxAngular + 0.75 * iw; }

inline int make_action_index(int iv, int iw) {
  if (iv < 0 || iv >= kNumLinear || iw < 0 || iw >= kNumAngular)
    throw std::out_of_range("action component out of range");
  return iv * kNumAngular + iw;
}

inline ActionCommand decode_action(int index) {
  if (index < 0 || index >= kNumActions)
    throw std::out_of_range("action index out of range");
  return {linear_value(index / kNumAngular), angular_value(index % kNumAngular)};
}

// v = 0, omega = 0.
inline constexpr int kStopAction = 2;

}  // namespace covnav
