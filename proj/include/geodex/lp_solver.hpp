#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace geodex {

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  /// Optimal point (Optimal), or the last basic point reached.
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Infeasible: y >= 0 with rows^T y = 0 and offsets^T y > 0 (Farkas).
  /// Unbounded: direction d with rows * d >= 0 and objective^T d < 0.
  Eigen::VectorXd certificate;
  int pivots = 0;
};

class LpSolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LpOptions {
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-10;
  double pivot_tolerance = 1e-12;
  int max_pivots = 100000;
};

/// Dense two-phase primal simplex for
///
///   min objective^T x  s.t.  rows * x >= offsets,  x free.
///
/// Free variables are split into x+ - x-, each row gets a surplus variable,
/// and phase one starts from a single artificial variable shared by all rows
/// with a positive offset.
/// Entering and leaving choices follow Bland's rule, so the method never
/// cycles.
LpResult lp_solve(const Eigen::MatrixXd& rows, const Eigen::VectorXd& offsets,
                  const Eigen::VectorXd& objective, const LpOptions& options = {});

}  // namespace geodex
