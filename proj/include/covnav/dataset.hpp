#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "covnav/grid.hpp"
#include "covnav/rewards.hpp"

namespace covnav {

// One tabular transition. Serialized record layout (little-endian, 14 bytes):
//   u16 state | u8 action | f64 reward | u16 next_state | u8 terminal
struct Transition {
  std::uint16_t state = 0;
  std::uint8_t action = 0;
  double reward = 0.0;
  std::uint16_t next_state = 0;
  std::uint8_t terminal = 0;

  bool operator==(const Transition&) const = default;
};

inline constexpr std::size_t kTransitionRecordBytes = 14;

// Optional per-transition audit record: the exact maps and poses a
// transition was scored against, sufficient to recompute its reward and
// state indices from scratch. Only populated on request (small datasets).
struct TransitionAudit {
  int episode = 0;
  int step = 0;
  std::string augmentation;  // empty for the base copy
  double x0 = 0, y0 = 0, heading0 = 0;
  double x1 = 0, y1 = 0, heading1 = 0;
  std::shared_ptr<const CoverMap> cover;
  std::shared_ptr<const HeightMap> height;
  std::shared_ptr<const GoalMap> goal;
  std::shared_ptr<const ThreatMap> threat;       // field used for state s
  std::shared_ptr<const ThreatMap> threat_next;  // field used for state s'
};

struct Dataset {
  GridSpec grid;
  std::uint64_t seed = 0;
  std::vector<std::string> augmentations;  // e.g. "rot90", "shift:3,-2"
  std::string hyperparameters_json = "{}"; // compact JSON echoed in the header
  std::vector<Transition> transitions;
  std::vector<TransitionAudit> audit;      // empty unless requested
};

// Header line (JSON, version "dataset.v1") + packed binary records.
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);  // audit records are not stored

// --------------------------------------------------------------------------
// Augmentation transforms. Quarter-turn rotations about the grid center
// (square grids only for 90/270) and integer-cell origin shifts. Maps,
// poses, and the goal transform together so augmented copies stay
// self-consistent; downstream quantities are recomputed from the
// transformed inputs rather than transformed directly.
// --------------------------------------------------------------------------

struct Augmentation {
  int quarter_turns = 0;  // 0..3, counter-clockwise
  int shift_i = 0;        // origin shift in cells
  int shift_j = 0;
};

// Parses "rot90" / "rot180" / "rot270" / "shift:di,dj" (combined with '+',
// e.g. "rot90+shift:2,-1"). Throws std::invalid_argument on unknown forms.
Augmentation parse_augmentation(const std::string& text);

GridSpec transform_spec(const GridSpec& spec, const Augmentation& aug);
GridMap<double> transform_grid(const GridMap<double>& map,
                               const Augmentation& aug);
void transform_pose(const GridSpec& spec, const Augmentation& aug, double& x,
                    double& y, double& heading);
void transform_point(const GridSpec& spec, const Augmentation& aug, double& x,
                     double& y);

}  // namespace covnav
