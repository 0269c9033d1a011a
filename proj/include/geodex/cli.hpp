#pragma once

#include <iosfwd>
#include <vector>

#include "geodex/grasp_sim.hpp"

namespace geodex {

enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitInput = 2,
  kExitInfeasible = 3,
};

/// Runs `reps` copies of `config` with seeds config.seed, config.seed + 1, ...
/// on up to `threads` workers (0: one per core). Reports come back in seed
/// order.
std::vector<RunReport> run_repetitions(const ScenarioConfig& config, int reps, unsigned threads = 0);

/// Success count and force-error statistics split by outcome.
struct RepetitionStats {
  int runs = 0;
  int successes = 0;
  double error_success_mean = 0.0, error_success_std = 0.0;
  double error_failure_mean = 0.0, error_failure_std = 0.0;
  double mean_rms_angle_deg = 0.0;
};
RepetitionStats summarize(const std::vector<RunReport>& reports);

/// Entry point of the geodex command-line tool:
///
///   geodex plan  <scenario> [--sigma-scale S] [--out-dir DIR]
///   geodex run   <scenario> [--feedback est|raw] [--reps N] [--seed S] [--out-dir DIR]
///   geodex bench [--steps N ...] [--repeats R] [--scenario FILE]
///
/// Returns one of ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace geodex
