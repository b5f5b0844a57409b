// Benchmark: serial reference kernels vs the OpenMP production kernels.
//
// Exercises visibility-grid construction and full threat-field evaluation on
// randomized height/cover/belief inputs, times both implementations with
// omp_get_wtime, and verifies the outputs are bit-identical (any mismatch is
// a hard failure, exit 1).

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <omp.h>

#include "covnav/maps.hpp"
#include "covnav/rng.hpp"
#include "covnav/threat.hpp"

using namespace covnav;

namespace {

struct Scene {
  HeightMap height;
  CoverMap cover;
  GoalMap goal;
  ThreatBelief belief;
};

Scene make_scene(int side, std::uint64_t seed) {
  Rng rng(seed);
  const GridSpec spec{side, side, 1.0, 0.0, 0.0};
  Scene s{HeightMap(spec, 0.0), CoverMap(spec, 0.0),
          build_goal_map(spec, side - 0.5, side - 0.5), uniform_belief(spec)};
  // Sparse occupancy: ~15% obstacle cells with heights up to 4 m.
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (rng.uniform() < 0.15) s.height.cells()[k] = rng.uniform(0.5, 4.0);
    s.cover.cells()[k] = rng.uniform() < 0.2 ? rng.uniform(0.0, 1.0) : 0.0;
  }
  // Concentrate belief mass on a handful of cells so the vantage set is busy.
  std::vector<double>& p = s.belief.p;
  for (int v = 0; v < 24; ++v)
    p[rng.uniform_index(p.size())] += rng.uniform(0.005, 0.06);
  double total = 0.0;
  for (double x : p) total += x;
  for (double& x : p) x /= total;
  return s;
}

double checksum(const ThreatMap& m) {
  double acc = 0.0;
  for (double v : m.cells()) acc += v;
  return acc;
}

}  // namespace

int main(int argc, char** argv) {
  const int side = argc > 1 ? std::atoi(argv[1]) : 96;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
  const Scene scene = make_scene(side, 20240613);

  std::printf("grid %dx%d, %d repetitions, omp_get_max_threads=%d\n", side,
              side, reps, omp_get_max_threads());

  const ThreatFieldParams params;  // defaults: k=16, gamma=0.95, range 15 m
  const std::vector<CellIndex> trajectory = {{side / 2, side / 2}};

  // --- visibility grids over the vantage set ---------------------------------
  const std::vector<Vantage> vantages =
      build_vantage_set(scene.belief, params.vantage_k, params.mass_floor);
  std::printf("vantage set: %zu cells\n", vantages.size());

  double t_serial = 0.0, t_parallel = 0.0;
  std::size_t vis_mismatches = 0;
  for (int r = 0; r < reps; ++r) {
    for (const Vantage& v : vantages) {
      double t0 = omp_get_wtime();
      const std::vector<std::uint8_t> ref =
          visibility_grid_serial(scene.height, v.cell, params.vision);
      double t1 = omp_get_wtime();
      const std::vector<std::uint8_t> par =
          visibility_grid(scene.height, v.cell, params.vision);
      double t2 = omp_get_wtime();
      t_serial += t1 - t0;
      t_parallel += t2 - t1;
      if (ref != par) ++vis_mismatches;
    }
  }
  std::printf("visibility_grid   serial %8.1f ms   openmp %8.1f ms   speedup %.2fx   %s\n",
              1e3 * t_serial, 1e3 * t_parallel, t_serial / t_parallel,
              vis_mismatches == 0 ? "outputs identical" : "MISMATCH");

  // --- full threat field -----------------------------------------------------
  double f_serial = 0.0, f_parallel = 0.0;
  std::size_t field_mismatches = 0;
  double sum_ref = 0.0, sum_par = 0.0;
  for (int r = 0; r < reps; ++r) {
    double t0 = omp_get_wtime();
    const ThreatMap ref = threat_field_serial(trajectory, scene.belief,
                                              scene.height, scene.cover,
                                              scene.goal, params);
    double t1 = omp_get_wtime();
    const ThreatMap par = threat_field(trajectory, scene.belief, scene.height,
                                       scene.cover, scene.goal, params);
    double t2 = omp_get_wtime();
    f_serial += t1 - t0;
    f_parallel += t2 - t1;
    if (!(ref == par)) ++field_mismatches;
    sum_ref = checksum(ref);
    sum_par = checksum(par);
  }
  std::printf("threat_field      serial %8.1f ms   openmp %8.1f ms   speedup %.2fx   %s\n",
              1e3 * f_serial, 1e3 * f_parallel, f_serial / f_parallel,
              field_mismatches == 0 ? "outputs identical" : "MISMATCH");
  std::printf("checksums: serial %.17g, openmp %.17g\n", sum_ref, sum_par);

  if (vis_mismatches + field_mismatches > 0) {
    std::printf("FAIL: parallel kernels diverged from the serial reference\n");
    return 1;
  }
  std::printf("OK\n");
  return 0;
}
