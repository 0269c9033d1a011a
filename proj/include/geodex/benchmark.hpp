#pragma once

#include <vector>

#include "geodex/scenario.hpp"

namespace geodex {

struct BenchmarkResult {
  int steps = 0;
  int repeats = 0;
  /// Median over repeats of the summed per-step planning time [s].
  double geometric_seconds = 0.0;
  double baseline_seconds = 0.0;
  double speedup = 0.0;
  /// Steps where the baseline did not converge; left out of both totals.
  std::vector<int> baseline_failures;
  int geometric_infeasible = 0;
  int baseline_infeasible = 0;
  /// Steps where exactly one path found a plan.
  int feasibility_disagreements = 0;
};

/// Plans the grasp of `config` for `steps` control steps, with the object
/// rolled a little further about the x axis through the CoM at every step,
/// through the geometric LP pipeline and through the SOCP baseline. Only the
/// planning calls are timed; scene construction is not.
BenchmarkResult run_planning_benchmark(const ScenarioConfig& config, int steps, int repeats = 5);

}  // namespace geodex
