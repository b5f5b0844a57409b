#include "covnav/threat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace covnav {

namespace {

// Inline strict-crossing walk between cell centers; returns false as soon as
// an interior cell blocks. Shares the crossing arithmetic with
// cell_to_cell_ray but avoids materializing the cell list.
bool ray_clear(const HeightMap& height, CellIndex a, CellIndex b,
               double eye_height) {
  const int di = b.i - a.i, dj = b.j - a.j;
  const int adi = std::abs(di), adj = std::abs(dj);
  const int si = sgn(di), sj = sgn(dj);
  CellIndex cur = a;
  long long nx = 0, ny = 0;
  while (!(cur == b)) {
    if (adj == 0) {
      cur.i += si;
      ++nx;
    } else if (adi == 0) {
      cur.j += sj;
      ++ny;
    } else {
      const long long lhs = (2 * nx + 1) * adj;
      const long long rhs = (2 * ny + 1) * adi;
      if (lhs < rhs) {
        cur.i += si;
        ++nx;
      } else if (lhs > rhs) {
        cur.j += sj;
        ++ny;
      } else {
        cur.i += si;
        cur.j += sj;
        ++nx;
        ++ny;
      }
    }
    if (cur == b) break;
    if (height(cur) >= eye_height) return false;
  }
  return true;
}

}  // namespace

ThreatBelief uniform_belief(const GridSpec& spec) {
  if (spec.size() == 0) throw std::invalid_argument("empty grid");
  ThreatBelief b;
  b.spec = spec;
  b.p.assign(spec.size(), 1.0 / static_cast<double>(spec.size()));
  return b;
}

bool line_of_sight(const HeightMap& height, CellIndex from, CellIndex to,
                   const VisionParams& vision) {
  const GridSpec& spec = height.spec();
  if (!spec.contains(from) || !spec.contains(to))
    throw std::invalid_argument("line_of_sight: cell outside grid");
  const double dx = (to.i - from.i) * spec.cell_size;
  const double dy = (to.j - from.j) * spec.cell_size;
  if (dx * dx + dy * dy > vision.max_range * vision.max_range) return false;
  if (from == to) return true;
  return ray_clear(height, from, to, vision.eye_height);
}

std::vector<std::uint8_t> visibility_grid_serial(const HeightMap& height,
                                                 CellIndex vantage,
                                                 const VisionParams& vision) {
  const GridSpec& spec = height.spec();
  std::vector<std::uint8_t> out(spec.size(), 0);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i)
      out[spec.index(i, j)] =
          line_of_sight(height, vantage, {i, j}, vision) ? 1 : 0;
  return out;
}

std::vector<std::uint8_t> visibility_grid(const HeightMap& height,
                                          CellIndex vantage,
                                          const VisionParams& vision) {
  const GridSpec& spec = height.spec();
  std::vector<std::uint8_t> out(spec.size(), 0);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i)
      out[spec.index(i, j)] =
          line_of_sight(height, vantage, {i, j}, vision) ? 1 : 0;
  return out;
}

const std::vector<std::uint8_t>& VisibilityCache::from(CellIndex vantage) {
  const std::size_t key = height_->spec().index(vantage);
  auto it = grids_.find(key);
  if (it == grids_.end())
    it = grids_.emplace(key, visibility_grid(*height_, vantage, vision_)).first;
  return it->second;
}

std::vector<std::uint8_t> scan_mask(const HeightMap& height, CellIndex observer,
                                    const VisionParams& vision,
                                    double sensor_range) {
  VisionParams v = vision;
  v.max_range = sensor_range;
  return visibility_grid(height, observer, v);
}

std::vector<double> observation_likelihood(
    const std::vector<std::uint8_t>& scanned,
    const std::vector<std::uint8_t>& detections, double p_detect) {
  if (scanned.size() != detections.size())
    throw std::invalid_argument("observation_likelihood: size mismatch");
  std::vector<double> like(scanned.size(), 1.0);
  for (std::size_t k = 0; k < scanned.size(); ++k) {
    if (detections[k])
      like[k] = p_detect;
    else if (scanned[k])
      like[k] = 1.0 - p_detect;
  }
  return like;
}

BeliefUpdateResult belief_update(const ThreatBelief& prior,
                                 const std::vector<double>& likelihood) {
  if (likelihood.size() != prior.p.size())
    throw std::invalid_argument("belief_update: size mismatch");
  BeliefUpdateResult res;
  res.posterior.spec = prior.spec;
  res.posterior.p.resize(prior.p.size());
  double total = 0.0;
  for (std::size_t k = 0; k < prior.p.size(); ++k) {
    res.posterior.p[k] = prior.p[k] * likelihood[k];
    total += res.posterior.p[k];
  }
  if (total <= 0.0) {
    res.posterior.p = prior.p;
    res.degenerate = true;
    return res;
  }
  for (double& v : res.posterior.p) v /= total;
  return res;
}

ThreatBelief diffuse_belief(const ThreatBelief& belief, double rate) {
  if (rate < 0.0 || rate > 1.0)
    throw std::invalid_argument("diffusion rate must be in [0, 1]");
  const GridSpec& spec = belief.spec;
  ThreatBelief out = belief;
  if (rate == 0.0) return out;
  const double f = rate / 4.0;
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      const std::size_t c = spec.index(i, j);
      // Right and up edges only; each edge exchanges mass antisymmetrically,
      // so the total is conserved exactly.
      if (i + 1 < spec.width) {
        const std::size_t n = spec.index(i + 1, j);
        const double flow = f * (belief.p[c] - belief.p[n]);
        out.p[c] -= flow;
        out.p[n] += flow;
      }
      if (j + 1 < spec.height) {
        const std::size_t n = spec.index(i, j + 1);
        const double flow = f * (belief.p[c] - belief.p[n]);
        out.p[c] -= flow;
        out.p[n] += flow;
      }
    }
  return out;
}

std::vector<Vantage> build_vantage_set(const ThreatBelief& belief, int k,
                                       double mass_floor) {
  if (k < 0) throw std::invalid_argument("vantage count must be >= 0");
  std::vector<std::uint32_t> order;
  order.reserve(belief.p.size());
  for (std::uint32_t idx = 0; idx < belief.p.size(); ++idx)
    if (belief.p[idx] >= mass_floor) order.push_back(idx);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (belief.p[a] != belief.p[b]) return belief.p[a] > belief.p[b];
    return a < b;
  });
  if (static_cast<int>(order.size()) > k) order.resize(k);
  std::vector<Vantage> out;
  out.reserve(order.size());
  for (std::uint32_t idx : order) {
    const int i = static_cast<int>(idx) % belief.spec.width;
    const int j = static_cast<int>(idx) / belief.spec.width;
    out.push_back({{i, j}, belief.p[idx]});
  }
  return out;
}

double multi_perspective_threat(const HeightMap& height, CellIndex cell,
                                const std::vector<Vantage>& vantages,
                                const VisionParams& vision) {
  double worst = 0.0;
  for (const Vantage& v : vantages)
    if (line_of_sight(height, cell, v.cell, vision))
      worst = std::max(worst, v.p);
  return worst;
}

double discounted_max(const std::vector<double>& values, double gamma) {
  double best = 0.0;
  double g = 1.0;
  for (double v : values) {
    best = std::max(best, v * g);
    g *= gamma;
  }
  return best;
}

double temporal_visibility(const HeightMap& height, CellIndex cell,
                           const std::vector<CellIndex>& trajectory,
                           const std::vector<Vantage>& vantages, double gamma,
                           const VisionParams& vision) {
  if (trajectory.empty())
    throw std::invalid_argument("temporal_visibility: empty trajectory");
  std::vector<double> per_step;
  per_step.reserve(trajectory.size());
  for (std::size_t k = 0; k < trajectory.size(); ++k)
    per_step.push_back(multi_perspective_threat(height, cell, vantages, vision));
  return discounted_max(per_step, gamma);
}

double cover_aware_threat(const HeightMap& height, CellIndex cell,
                          const std::vector<CellIndex>& trajectory,
                          const std::vector<Vantage>& vantages,
                          const CoverMap& cover, const GoalMap& goal,
                          double gamma, const VisionParams& vision) {
  const double rho =
      temporal_visibility(height, cell, trajectory, vantages, gamma, vision);
  return rho * (1.0 - cover(cell)) * goal.distance(cell);
}

ThreatMap threat_field_serial(const std::vector<CellIndex>& trajectory,
                              const ThreatBelief& belief,
                              const HeightMap& height, const CoverMap& cover,
                              const GoalMap& goal,
                              const ThreatFieldParams& params) {
  if (trajectory.empty())
    throw std::invalid_argument("threat_field: empty trajectory");
  if (params.gamma < 0.0 || params.gamma > 1.0)
    throw std::invalid_argument("threat_field: gamma must be in [0, 1]");
  const GridSpec& spec = height.spec();
  const std::vector<Vantage> vantages =
      build_vantage_set(belief, params.vantage_k, params.mass_floor);
  ThreatMap out(spec, 0.0);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i)
      out(i, j) = cover_aware_threat(height, {i, j}, trajectory, vantages,
                                     cover, goal, params.gamma, params.vision);
  return out;
}

ThreatMap threat_field(const std::vector<CellIndex>& trajectory,
                       const ThreatBelief& belief, const HeightMap& height,
                       const CoverMap& cover, const GoalMap& goal,
                       const ThreatFieldParams& params,
                       VisibilityCache* cache) {
  if (trajectory.empty())
    throw std::invalid_argument("threat_field: empty trajectory");
  if (params.gamma < 0.0 || params.gamma > 1.0)
    throw std::invalid_argument("threat_field: gamma must be in [0, 1]");
  const GridSpec& spec = height.spec();
  const std::vector<Vantage> vantages =
      build_vantage_set(belief, params.vantage_k, params.mass_floor);

  // Per-vantage visibility sweeps; the per-cell pass then composes
  // max-over-vantages in the same order as the serial reference.
  std::vector<const std::vector<std::uint8_t>*> vis(vantages.size(), nullptr);
  std::vector<std::vector<std::uint8_t>> owned;
  if (cache) {
    for (std::size_t v = 0; v < vantages.size(); ++v)
      vis[v] = &cache->from(vantages[v].cell);
  } else {
    owned.resize(vantages.size());
    for (std::size_t v = 0; v < vantages.size(); ++v) {
      owned[v] = visibility_grid(height, vantages[v].cell, params.vision);
      vis[v] = &owned[v];
    }
  }

  ThreatMap out(spec, 0.0);
  const int n = static_cast<int>(spec.size());
#pragma omp parallel for schedule(static)
  for (int c = 0; c < n; ++c) {
    double tau = 0.0;
    for (std::size_t v = 0; v < vantages.size(); ++v)
      if ((*vis[v])[c]) tau = std::max(tau, vantages[v].p);
    // Discount over trajectory steps: the per-step score is identical at
    // every k, so the undiscounted first step attains the max (gamma <= 1).
    const CellIndex cell{c % spec.width, c / spec.width};
    out.cells()[c] = tau * (1.0 - cover(cell)) * goal.distance(cell);
  }
  return out;
}

}  // namespace covnav
