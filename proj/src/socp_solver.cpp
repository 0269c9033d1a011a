#include "geodex/socp_solver.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace geodex {

double SocpProblem::min_margin(const Eigen::VectorXd& z) const {
  double margin = std::numeric_limits<double>::infinity();
  if (linear_rows.rows() > 0) margin = (linear_rows * z - linear_offsets).minCoeff();
  for (const auto& k : cones) {
    margin = std::min(margin, k.c.dot(z) + k.d - (k.a * z + k.b).norm());
  }
  return margin;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BarrierEval {
  double value = kInf;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Barrier parameter: one per linear row, two per second-order cone.
double barrier_degree(const SocpProblem& p) {
  return static_cast<double>(p.linear_rows.rows() + 2 * static_cast<Eigen::Index>(p.cones.size()));
}

double barrier_value(const SocpProblem& p, const Eigen::VectorXd& z) {
  double value = 0.0;
  if (p.linear_rows.rows() > 0) {
    const Eigen::VectorXd r = p.linear_rows * z - p.linear_offsets;
    if ((r.array() <= 0.0).any()) return kInf;
    value -= r.array().log().sum();
  }
  for (const auto& k : p.cones) {
    const double u = k.c.dot(z) + k.d;
    const double s = u * u - (k.a * z + k.b).squaredNorm();
    if (u <= 0.0 || s <= 0.0) return kInf;
    value -= std::log(s);
  }
  return value;
}

BarrierEval evaluate(const SocpProblem& p, const Eigen::VectorXd& z, double t) {
  const Eigen::Index n = z.size();
  BarrierEval ev;
  ev.value = barrier_value(p, z);
  if (!std::isfinite(ev.value)) return ev;
  ev.value += t * p.objective.dot(z);
  ev.grad = t * p.objective;
  ev.hess = Eigen::MatrixXd::Zero(n, n);
  if (p.linear_rows.rows() > 0) {
    const Eigen::VectorXd r = p.linear_rows * z - p.linear_offsets;
    const Eigen::VectorXd inv = r.cwiseInverse();
    ev.grad -= p.linear_rows.transpose() * inv;
    ev.hess += p.linear_rows.transpose() * inv.cwiseAbs2().asDiagonal() * p.linear_rows;
  }
  for (const auto& k : p.cones) {
    const double u = k.c.dot(z) + k.d;
    const Eigen::VectorXd v = k.a * z + k.b;
    const double s = u * u - v.squaredNorm();
    const Eigen::VectorXd ds = 2.0 * u * k.c - 2.0 * k.a.transpose() * v;
    ev.grad -= ds / s;
    ev.hess += ds * ds.transpose() / (s * s) -
               (2.0 * k.c * k.c.transpose() - 2.0 * k.a.transpose() * k.a) / s;
  }
  return ev;
}

struct Centering {
  bool stopped_early = false;
};

// Damped Newton on t * q^T z + barrier(z). `stop` is checked after every step.
template <typename Stop>
Centering center(const SocpProblem& p, Eigen::VectorXd& z, double t, int& steps,
                 const SocpOptions& opt, Stop stop) {
  for (;;) {
    BarrierEval ev = evaluate(p, z, t);
    if (!std::isfinite(ev.value)) {
      throw SocpSolverError("barrier evaluated outside the strict interior");
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(ev.hess);
    Eigen::VectorXd step = ldlt.solve(-ev.grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      const double reg = 1e-10 * (1.0 + ev.hess.diagonal().cwiseAbs().maxCoeff());
      step = (ev.hess + reg * Eigen::MatrixXd::Identity(z.size(), z.size())).ldlt().solve(-ev.grad);
    }
    const double decrement = -ev.grad.dot(step);
    if (decrement / 2.0 <= opt.newton_tolerance) return {};
    if (steps >= opt.max_newton_steps) {
      throw SocpSolverError("interior point did not converge within " +
                            std::to_string(opt.max_newton_steps) + " Newton steps");
    }
    ++steps;

    double alpha = 1.0;
    bool accepted = false;
    bool stayed_inside = false;
    for (int halving = 0; halving < 60 && !accepted; ++halving) {
      const Eigen::VectorXd cand = z + alpha * step;
      double trial = barrier_value(p, cand);
      if (std::isfinite(trial)) {
        stayed_inside = true;
        trial += t * p.objective.dot(cand);
        accepted = trial <= ev.value - 0.25 * alpha * decrement && trial < ev.value;
      }
      if (!accepted) alpha *= 0.5;
    }
    if (!stayed_inside) throw SocpSolverError("line search failed to stay feasible");
    // No sufficient decrease along a feasible direction: the centering has hit
    // the rounding floor of the objective value.
    if (!accepted) return {};
    z += alpha * step;
    if (stop(z)) return {true};
  }
}

}  // namespace

SocpResult socp_solve(const SocpProblem& problem, const SocpOptions& opt) {
  const Eigen::Index n = problem.variables();
  if (problem.linear_rows.cols() != n && problem.linear_rows.rows() > 0) {
    throw std::invalid_argument("socp_solve: linear rows have wrong width");
  }
  SocpResult result;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);

  if (!(problem.min_margin(z) > 0.0)) {
    // Phase one over (z, s): every constraint relaxed by s, minimise s >= -1.
    SocpProblem phase1;
    phase1.objective = Eigen::VectorXd::Zero(n + 1);
    phase1.objective(n) = 1.0;
    const Eigen::Index m = problem.linear_rows.rows();
    phase1.linear_rows = Eigen::MatrixXd::Zero(m + 1, n + 1);
    phase1.linear_offsets = Eigen::VectorXd::Zero(m + 1);
    if (m > 0) {
      phase1.linear_rows.topLeftCorner(m, n) = problem.linear_rows;
      phase1.linear_offsets.head(m) = problem.linear_offsets;
    }
    phase1.linear_rows.col(n).setOnes();
    phase1.linear_offsets(m) = -1.0;
    for (const auto& k : problem.cones) {
      SocConstraint kk;
      kk.a = Eigen::MatrixXd::Zero(k.a.rows(), n + 1);
      kk.a.leftCols(n) = k.a;
      kk.b = k.b;
      kk.c = Eigen::VectorXd::Zero(n + 1);
      kk.c.head(n) = k.c;
      kk.c(n) = 1.0;
      kk.d = k.d;
      phase1.cones.push_back(std::move(kk));
    }
    Eigen::VectorXd zs(n + 1);
    zs.head(n) = z;
    zs(n) = std::max(1.0, -problem.min_margin(z) + 1.0);

    const double degree = barrier_degree(phase1);
    double t = opt.initial_t;
    bool found = false;
    auto strictly_feasible = [n](const Eigen::VectorXd& v) { return v(n) < 0.0; };
    for (;;) {
      ++result.outer_iterations;
      if (center(phase1, zs, t, result.newton_steps, opt, strictly_feasible).stopped_early) {
        found = true;
        break;
      }
      // On the central path the optimal slack is at least s - degree / t.
      if (zs(n) - degree / t > 0.0 || degree / t < opt.gap_tolerance) break;
      t *= opt.barrier_decrease;
    }
    if (!found) {
      result.status = SocpStatus::Infeasible;
      result.z = zs.head(n);
      return result;
    }
    z = zs.head(n);
  }

  const double degree = barrier_degree(problem);
  double t = opt.initial_t;
  auto never = [](const Eigen::VectorXd&) { return false; };
  for (;;) {
    ++result.outer_iterations;
    center(problem, z, t, result.newton_steps, opt, never);
    if (degree / t < opt.gap_tolerance) break;
    t *= opt.barrier_decrease;
  }
  result.status = SocpStatus::Optimal;
  result.z = z;
  result.objective = problem.objective.dot(z);
  return result;
}

}  // namespace geodex
