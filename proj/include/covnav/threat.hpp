#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "covnav/grid.hpp"

namespace covnav {

// Per-cell probability that a threat occupies the cell; sums to 1.
struct ThreatBelief {
  GridSpec spec;
  std::vector<double> p;
};

ThreatBelief uniform_belief(const GridSpec& spec);

struct VisionParams {
  double eye_height = 1.5;  // sightline blocked by cells at or above this
  double max_range = 15.0;  // meters, center-to-center
};

// --------------------------------------------------------------------------
// Line of sight and visibility sweeps.
// --------------------------------------------------------------------------

// True iff the segment between the two cell centers is within max_range and
// no strictly-crossed interior cell has height >= eye_height. Endpoint cells
// never block; a ray that only grazes a cell corner is not blocked by the
// touching cells. Symmetric in (from, to).
bool line_of_sight(const HeightMap& height, CellIndex from, CellIndex to,
                   const VisionParams& vision);

// 0/1 visibility of every cell from one vantage. The _serial variant is the
// reference implementation; the default is OpenMP-parallel over rows. Both
// produce identical output.
std::vector<std::uint8_t> visibility_grid(const HeightMap& height,
                                          CellIndex vantage,
                                          const VisionParams& vision);
std::vector<std::uint8_t> visibility_grid_serial(const HeightMap& height,
                                                 CellIndex vantage,
                                                 const VisionParams& vision);

// Memoizes visibility_grid per vantage cell for one fixed height map.
class VisibilityCache {
 public:
  VisibilityCache(const HeightMap& height, VisionParams vision)
      : height_(&height), vision_(vision) {}
  const std::vector<std::uint8_t>& from(CellIndex vantage);

 private:
  const HeightMap* height_;
  VisionParams vision_;
  std::unordered_map<std::size_t, std::vector<std::uint8_t>> grids_;
};

// --------------------------------------------------------------------------
// Belief maintenance.
// --------------------------------------------------------------------------

// Cells visible from `observer` within sensor_range (line of sight at the
// vision eye height). The observer's own cell is scanned.
std::vector<std::uint8_t> scan_mask(const HeightMap& height, CellIndex observer,
                                    const VisionParams& vision,
                                    double sensor_range);

// Per-cell observation likelihood: p_detect where a detection was reported,
// 1 - p_detect for cells scanned without detection, 1 for unscanned cells.
std::vector<double> observation_likelihood(
    const std::vector<std::uint8_t>& scanned,
    const std::vector<std::uint8_t>& detections, double p_detect);

struct BeliefUpdateResult {
  ThreatBelief posterior;
  bool degenerate = false;  // zero total evidence; posterior == prior
};

// Pointwise Bayes product with renormalization. A likelihood that zeroes all
// mass leaves the belief unchanged and sets the degenerate flag.
BeliefUpdateResult belief_update(const ThreatBelief& prior,
                                 const std::vector<double>& likelihood);

// Mass-conserving 4-neighbour mixing; rate in [0, 1] is the fraction of a
// cell's mass offered to its neighbours per call (rate/4 per edge, boundary
// edges closed).
ThreatBelief diffuse_belief(const ThreatBelief& belief, double rate);

// --------------------------------------------------------------------------
// Threat scoring.
// --------------------------------------------------------------------------

struct Vantage {
  CellIndex cell;
  double p = 0.0;
};

// Top-k belief cells with p >= mass_floor, ordered by descending p (ties:
// lower flat index). May return fewer than k entries, possibly none.
std::vector<Vantage> build_vantage_set(const ThreatBelief& belief, int k,
                                       double mass_floor);

// Worst-case visibility score of `cell`: max over vantages of
// visible(cell, vantage) * p(vantage).
double multi_perspective_threat(const HeightMap& height, CellIndex cell,
                                const std::vector<Vantage>& vantages,
                                const VisionParams& vision);

// max_k values[k] * gamma^k.
double discounted_max(const std::vector<double>& values, double gamma);

// Discounted worst-case visibility along a trajectory of grid cells:
// max over step index k of the vantage-set score at step k times gamma^k.
// The trajectory must be non-empty.
double temporal_visibility(const HeightMap& height, CellIndex cell,
                           const std::vector<CellIndex>& trajectory,
                           const std::vector<Vantage>& vantages, double gamma,
                           const VisionParams& vision);

// Cover-discounted, goal-weighted threat score:
//   temporal_visibility * (1 - cover) * goal_distance.
// Zero cover exposure guarantee: a fully covered cell scores exactly 0.
double cover_aware_threat(const HeightMap& height, CellIndex cell,
                          const std::vector<CellIndex>& trajectory,
                          const std::vector<Vantage>& vantages,
                          const CoverMap& cover, const GoalMap& goal,
                          double gamma, const VisionParams& vision);

struct ThreatFieldParams {
  int vantage_k = 16;
  double mass_floor = 1e-3;
  double gamma = 0.95;
  VisionParams vision;
};

// Full-grid threat map. threat_field_serial is the per-cell compositional
// reference; threat_field precomputes per-vantage visibility grids (OpenMP)
// and must produce bit-identical output. An optional cache reuses visibility
// grids across calls that share the same height map.
ThreatMap threat_field_serial(const std::vector<CellIndex>& trajectory,
                              const ThreatBelief& belief,
                              const HeightMap& height, const CoverMap& cover,
                              const GoalMap& goal,
                              const ThreatFieldParams& params);
ThreatMap threat_field(const std::vector<CellIndex>& trajectory,
                       const ThreatBelief& belief, const HeightMap& height,
                       const CoverMap& cover, const GoalMap& goal,
                       const ThreatFieldParams& params,
                       VisibilityCache* cache = nullptr);

}  // namespace covnav
