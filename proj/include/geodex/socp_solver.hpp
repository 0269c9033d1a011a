#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace geodex {

/// ||a z + b|| <= c^T z + d
struct SocConstraint {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  double d = 0.0;
};

/// min objective^T z  s.t.  linear_rows z >= linear_offsets, all cones.
struct SocpProblem {
  Eigen::VectorXd objective;
  Eigen::MatrixXd linear_rows;
  Eigen::VectorXd linear_offsets;
  std::vector<SocConstraint> cones;

  Eigen::Index variables() const { return objective.size(); }
  /// Smallest constraint margin at z (cone margin is c^T z + d - ||a z + b||).
  double min_margin(const Eigen::VectorXd& z) const;
};

enum class SocpStatus { Optimal, Infeasible };

struct SocpResult {
  SocpStatus status = SocpStatus::Infeasible;
  Eigen::VectorXd z;
  double objective = 0.0;
  int newton_steps = 0;
  int outer_iterations = 0;
};

class SocpSolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SocpOptions {
  double barrier_decrease = 10.0;
  double initial_t = 1.0;
  double newton_tolerance = 1e-8;
  double gap_tolerance = 1e-7;
  int max_newton_steps = 200;
};

/// Log-barrier interior-point method. A phase-one problem (minimise a shared
/// slack) finds a strictly feasible start; phase two follows the central path
/// with t <- barrier_decrease * t until the barrier gap drops below
/// gap_tolerance. The Newton step budget is shared by both phases.
SocpResult socp_solve(const SocpProblem& problem, const SocpOptions& options = {});

}  // namespace geodex
