#include "geodex/lp_solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace geodex {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

// Candidate pivots must exceed this magnitude; anything between it and the
// breakdown threshold is reported as a numerical failure.
constexpr double kRatioPivotFloor = 1e-9;

class Tableau {
 public:
  Tableau(Eigen::Index rows, Eigen::Index cols)
      : t_(Matrix::Zero(rows + 1, cols + 1)), basis_(static_cast<std::size_t>(rows)),
        m_(rows), cols_(cols) {}

  double& at(Eigen::Index r, Eigen::Index c) { return t_(r, c); }
  double at(Eigen::Index r, Eigen::Index c) const { return t_(r, c); }
  double& rhs(Eigen::Index r) { return t_(r, cols_); }
  double rhs(Eigen::Index r) const { return t_(r, cols_); }
  auto cost_row() { return t_.row(m_); }
  Eigen::Index rows() const { return m_; }
  Eigen::Index cols() const { return cols_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  const std::vector<Eigen::Index>& basis() const { return basis_; }
  int pivots() const { return pivots_; }

  void pivot(Eigen::Index r, Eigen::Index j) {
    t_.row(r) /= t_(r, j);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, j);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = j;
    ++pivots_;
  }

  /// Reset the cost row to c - c_B^T B^-1 A for the given column costs.
  void price(const Eigen::VectorXd& costs) {
    t_.row(m_).setZero();
    t_.row(m_).head(cols_) = costs.transpose();
    for (Eigen::Index r = 0; r < m_; ++r) {
      const double cb = costs(basis_[static_cast<std::size_t>(r)]);
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(r);
    }
  }

 private:
  // Pivots are row operations, so rows are kept contiguous.
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Matrix t_;
  std::vector<Eigen::Index> basis_;
  Eigen::Index m_;
  Eigen::Index cols_;
  int pivots_ = 0;
};

struct PhaseOutcome {
  bool unbounded = false;
  Eigen::Index entering = -1;
};

PhaseOutcome run_phase(Tableau& tab, Eigen::Index allowed_cols, const LpOptions& opt) {
  for (;;) {
    if (tab.pivots() > opt.max_pivots) {
      throw LpSolverError("simplex exceeded " + std::to_string(opt.max_pivots) + " pivots");
    }
    Eigen::Index entering = -1;
    for (Eigen::Index j = 0; j < allowed_cols; ++j) {
      if (tab.at(tab.rows(), j) < -opt.optimality_tolerance) {
        entering = j;
        break;
      }
    }
    if (entering < 0) return {};

    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    bool tiny_pivot_seen = false;
    for (Eigen::Index i = 0; i < tab.rows(); ++i) {
      const double a = tab.at(i, entering);
      if (a <= kRatioPivotFloor) {
        if (a > opt.pivot_tolerance) tiny_pivot_seen = true;
        continue;
      }
      const double ratio = std::max(tab.rhs(i), 0.0) / a;
      const double tie = 1e-12 * (1.0 + std::abs(best));
      if (leave < 0 || ratio < best - tie ||
          (std::abs(ratio - best) <= tie &&
           tab.basis()[static_cast<std::size_t>(i)] < tab.basis()[static_cast<std::size_t>(leave)])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) {
      if (tiny_pivot_seen) {
        std::ostringstream msg;
        msg << "simplex numerical breakdown: column " << entering
            << " has only pivots below " << kRatioPivotFloor << " after " << tab.pivots()
            << " pivots";
        throw LpSolverError(msg.str());
      }
      return {true, entering};
    }
    tab.pivot(leave, entering);
  }
}

}  // namespace

LpResult lp_solve(const Eigen::MatrixXd& rows, const Eigen::VectorXd& offsets,
                  const Eigen::VectorXd& objective, const LpOptions& opt) {
  const Eigen::Index m = rows.rows();
  const Eigen::Index n = rows.cols();
  if (offsets.size() != m || objective.size() != n) {
    throw std::invalid_argument("lp_solve: inconsistent dimensions");
  }
  if (!rows.allFinite() || !offsets.allFinite() || !objective.allFinite()) {
    throw std::invalid_argument("lp_solve: non-finite data");
  }
  if (m == 0) {
    LpResult free;
    free.x = Eigen::VectorXd::Zero(n);
    if (objective.cwiseAbs().maxCoeff() > opt.optimality_tolerance) {
      free.status = LpStatus::Unbounded;
      free.certificate = -objective;
    } else {
      free.status = LpStatus::Optimal;
    }
    return free;
  }

  // Columns: x+ (n), x- (n), surplus s (m), one artificial t. Row i is stored
  // negated, -a_i x + s_i - [b_i > 0] t = -b_i, so the surpluses form the
  // starting basis; pivoting t into the most violated row makes it feasible.
  const Eigen::Index slack0 = 2 * n;
  const Eigen::Index art = 2 * n + m;
  const Eigen::Index cols = art + 1;

  Tableau tab(m, cols);
  Eigen::Index worst = -1;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      tab.at(i, j) = -rows(i, j);
      tab.at(i, n + j) = rows(i, j);
    }
    tab.at(i, slack0 + i) = 1.0;
    tab.rhs(i) = -offsets(i);
    if (offsets(i) > 0.0) {
      tab.at(i, art) = -1.0;
      if (worst < 0 || offsets(i) > offsets(worst)) worst = i;
    }
    tab.basis()[static_cast<std::size_t>(i)] = slack0 + i;
  }

  LpResult result;
  const double scale = 1.0 + offsets.cwiseAbs().maxCoeff();

  if (worst >= 0) {
    tab.pivot(worst, art);
    Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(cols);
    phase1_cost(art) = 1.0;
    tab.price(phase1_cost);
    run_phase(tab, cols, opt);
    const double infeasibility = -tab.rhs(m);
    if (infeasibility > opt.feasibility_tolerance * scale) {
      result.status = LpStatus::Infeasible;
      result.pivots = tab.pivots();
      // Phase-one duals are the reduced costs of the surplus columns.
      result.certificate.resize(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        result.certificate(i) = std::max(0.0, tab.at(m, slack0 + i));
      }
      result.x = Eigen::VectorXd::Zero(n);
      return result;
    }
    // A zero-valued artificial still in the basis is swapped for any column
    // with a usable entry in its row.
    for (Eigen::Index r = 0; r < m; ++r) {
      if (tab.basis()[static_cast<std::size_t>(r)] != art) continue;
      for (Eigen::Index j = 0; j < art; ++j) {
        if (std::abs(tab.at(r, j)) > kRatioPivotFloor) {
          tab.pivot(r, j);
          break;
        }
      }
    }
  }

  Eigen::VectorXd phase2_cost = Eigen::VectorXd::Zero(cols);
  phase2_cost.head(n) = objective;
  phase2_cost.segment(n, n) = -objective;
  tab.price(phase2_cost);
  const PhaseOutcome outcome = run_phase(tab, art, opt);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index b = tab.basis()[static_cast<std::size_t>(r)];
    if (b < n) x(b) += tab.rhs(r);
    else if (b < 2 * n) x(b - n) -= tab.rhs(r);
  }
  result.x = x;
  result.objective = objective.dot(x);
  result.pivots = tab.pivots();

  if (outcome.unbounded) {
    result.status = LpStatus::Unbounded;
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
    const Eigen::Index j = outcome.entering;
    if (j < n) dir(j) += 1.0;
    else if (j < 2 * n) dir(j - n) -= 1.0;
    for (Eigen::Index r = 0; r < m; ++r) {
      const Eigen::Index b = tab.basis()[static_cast<std::size_t>(r)];
      if (b < n) dir(b) -= tab.at(r, j);
      else if (b < 2 * n) dir(b - n) += tab.at(r, j);
    }
    result.certificate = dir;
    return result;
  }
  result.status = LpStatus::Optimal;
  return result;
}

}  // namespace geodex
