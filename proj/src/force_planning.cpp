#include "geodex/force_planning.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace geodex {

Eigen::VectorXd build_measurement_ellipsoid(const ContactSet& contacts) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(contacts.size()));
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const Contact& c = contacts[i];
    if (c.kind == ContactKind::Extrinsic) continue;
    if (!(c.measurement_sigma > 0.0) || !std::isfinite(c.measurement_sigma)) {
      throw std::invalid_argument("contact '" + c.name +
                                  "': intrinsic measurement sigma must be positive and finite");
    }
    d(static_cast<Eigen::Index>(i)) = 1.0 / (c.measurement_sigma * c.measurement_sigma);
  }
  return d;
}

Eigen::MatrixXd measurement_cone_matrix(const ContactSet& contacts) {
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(contacts.force_dim(),
                                            static_cast<Eigen::Index>(contacts.size()));
  for (std::size_t j = 0; j < contacts.size(); ++j) {
    n.block<3, 1>(static_cast<Eigen::Index>(3 * j), static_cast<Eigen::Index>(j)) =
        contacts[j].normal;
  }
  return n;
}

Eigen::MatrixXd symmetric_pinv(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double cutoff = rel_tol * ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > cutoff) inv(i) = 1.0 / ev(i);
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

UncertaintyModel propagate_ellipsoid(const FEPlane& plane, const ContactSet& contacts,
                                     const Eigen::VectorXd& d_diag) {
  if (d_diag.size() != static_cast<Eigen::Index>(contacts.size())) {
    throw std::invalid_argument("propagate_ellipsoid: D has wrong size");
  }
  UncertaintyModel u;
  u.d_diag = d_diag;
  u.sigmas.resize(d_diag.size());
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    u.sigmas(static_cast<Eigen::Index>(i)) = contacts[i].measurement_sigma;
  }
  u.e_hat = plane.basis * measurement_cone_matrix(contacts);
  if (plane.dimension == 0) {
    u.m = Eigen::MatrixXd::Zero(0, 0);
    u.m_pinv = u.m;
    return u;
  }
  const Eigen::MatrixXd e_pinv = u.e_hat.completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::MatrixXd m = e_pinv.transpose() * d_diag.asDiagonal() * e_pinv;
  u.m = 0.5 * (m + m.transpose());
  u.m_pinv = symmetric_pinv(u.m);
  return u;
}

UncertaintyModel build_uncertainty(const FEPlane& plane, const ContactSet& contacts) {
  return propagate_ellipsoid(plane, contacts, build_measurement_ellipsoid(contacts));
}

TightenedConstraints tighten_constraints(const ConstraintSet& cs_fe, const Eigen::MatrixXd& m) {
  return tighten_constraints(cs_fe, UncertaintyModel{{}, {}, {}, m, symmetric_pinv(m)});
}

TightenedConstraints tighten_constraints(const ConstraintSet& cs_fe,
                                         const UncertaintyModel& uncertainty) {
  const Eigen::MatrixXd& m = uncertainty.m;
  const Eigen::MatrixXd& m_pinv = uncertainty.m_pinv;
  if (cs_fe.matrix.cols() != m.rows()) {
    throw std::invalid_argument("tighten_constraints: constraint width and M disagree");
  }
  TightenedConstraints out;
  out.set = cs_fe;
  out.widths = Eigen::VectorXd::Zero(cs_fe.rows());
  if (m.rows() == 0) return out;
  const Eigen::MatrixXd range_proj = m * m_pinv;
  for (Eigen::Index i = 0; i < cs_fe.rows(); ++i) {
    const Eigen::VectorXd a = cs_fe.matrix.row(i).transpose();
    out.widths(i) = std::sqrt(std::max(0.0, a.dot(m_pinv * a)));
    out.set.offsets(i) += out.widths(i);
    if ((a - range_proj * a).norm() > 1e-9 * std::max(1.0, a.norm())) ++out.null_direction_rows;
  }
  return out;
}

Eigen::VectorXd normal_force_objective(const FEPlane& plane, const ContactSet& contacts) {
  const Eigen::VectorXd normals =
      measurement_cone_matrix(contacts) * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(contacts.size()));
  return plane.basis * normals;
}

namespace {

// max over unit tangents u of ||spread^T (u + mu n)||: the largest amount the
// ellipsoid can push mu n.f - u.f down. Subtracting it from the nominal cone
// margin keeps every force in the ellipsoid inside the exact cone.
double joint_cone_spread(const Eigen::MatrixXd& spread, const Eigen::Vector3d& t1,
                         const Eigen::Vector3d& t2, const Eigen::Vector3d& n, double mu) {
  if (spread.cols() == 0) return 0.0;
  auto value = [&](double a) {
    return (spread.transpose() * (std::cos(a) * t1 + std::sin(a) * t2 + mu * n)).norm();
  };
  constexpr int kSamples = 360;
  const double step = 2.0 * std::numbers::pi / kSamples;
  int best = 0;
  double best_value = value(0.0);
  for (int k = 1; k < kSamples; ++k) {
    const double v = value(k * step);
    if (v > best_value) best = k, best_value = v;
  }
  // Golden-section refinement on the bracketing interval.
  double lo = (best - 1) * step, hi = (best + 1) * step;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double a = hi - ratio * (hi - lo), b = lo + ratio * (hi - lo);
    if (value(a) > value(b)) hi = b; else lo = a;
  }
  return std::max(best_value, value(0.5 * (lo + hi)));
}

ForcePlan solve_plan(const FEPlane& plane, const ConstraintSet& cs, const ContactSet& contacts,
                     const UncertaintyModel& uncertainty, const Eigen::VectorXd& objective) {
  const ConstraintSet cs_fe = transform_constraints(plane, cs);
  const TightenedConstraints tight = tighten_constraints(cs_fe, uncertainty);

  ForcePlan plan;
  plan.null_direction_rows = tight.null_direction_rows;
  const LpResult lp = lp_solve(tight.set.matrix, tight.set.offsets, objective);
  plan.lp_status = lp.status;
  plan.pivots = lp.pivots;
  if (lp.status != LpStatus::Optimal) return plan;

  plan.feasible = true;
  plan.center = lp.x;
  plan.forces = from_fe_coords(plane, lp.x);
  plan.objective = lp.objective;
  plan.margin = tight.set.min_slack(lp.x);
  plan.desired_forces.reserve(contacts.size());
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    plan.desired_forces.emplace_back(plan.forces.segment<3>(static_cast<Eigen::Index>(3 * i)));
  }
  return plan;
}

}  // namespace

ForcePlan plan_grasp_forces(const FEPlane& plane, const ConstraintSet& cs,
                            const ContactSet& contacts, const UncertaintyModel& uncertainty,
                            PlanObjective objective) {
  if (contacts.extrinsic_count() != 0) {
    throw std::logic_error("plan_grasp_forces: extrinsic contacts present");
  }
  const Eigen::VectorXd q = objective == PlanObjective::Feasibility
                                ? Eigen::VectorXd::Zero(plane.dimension)
                                : normal_force_objective(plane, contacts);
  return solve_plan(plane, cs, contacts, uncertainty, q);
}

ForcePlan plan_extrinsic_forces(const FEPlane& plane, const ConstraintSet& cs,
                                const ContactSet& contacts, const UncertaintyModel& uncertainty) {
  if (contacts.extrinsic_count() == 0) {
    throw std::logic_error("plan_extrinsic_forces: no extrinsic contacts");
  }
  return solve_plan(plane, cs, contacts, uncertainty, normal_force_objective(plane, contacts));
}

BaselinePlan socp_baseline_plan(const FEPlane& plane, const ContactSet& contacts,
                                const ObjectModel& object, const UncertaintyModel& uncertainty,
                                const BaselineOptions& options) {
  object.validate();
  const Eigen::Index d = plane.dimension;
  const auto n = static_cast<Eigen::Index>(contacts.size());

  // Square root of M^+: maps the unit ball onto the FE-plane ellipsoid.
  Eigen::MatrixXd ellipsoid_root = Eigen::MatrixXd::Zero(d, d);
  if (d > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(uncertainty.m_pinv);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    ellipsoid_root = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
  }

  SocpProblem problem;
  problem.objective = normal_force_objective(plane, contacts);
  const auto ni = static_cast<Eigen::Index>(contacts.intrinsic_count());
  const bool bounded = std::isfinite(options.max_intrinsic_force);
  const Eigen::Index box0 = bounded ? 2 * ni : ni;
  problem.linear_rows = Eigen::MatrixXd::Zero(box0 + 2 * d, d);
  problem.linear_offsets = Eigen::VectorXd::Zero(box0 + 2 * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Contact& c = contacts[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd f_map = plane.basis.transpose().middleRows(3 * i, 3);
    const Eigen::Vector3d f_off = plane.particular.segment<3>(3 * i);
    const Eigen::MatrixXd spread = f_map * ellipsoid_root;
    const auto [t1, t2] = tangent_frame(c.normal);
    Eigen::Matrix<double, 2, 3> tangent;
    tangent.row(0) = t1.transpose();
    tangent.row(1) = t2.transpose();

    const double normal_spread = (spread.transpose() * c.normal).norm();

    SocConstraint cone;
    cone.a = tangent * f_map;
    cone.b = tangent * f_off;
    cone.c = c.friction_coefficient * (f_map.transpose() * c.normal);
    cone.d = c.friction_coefficient * c.normal.dot(f_off) -
             joint_cone_spread(spread, t1, t2, c.normal, c.friction_coefficient);
    problem.cones.push_back(std::move(cone));

    if (c.kind == ContactKind::Intrinsic) {
      problem.linear_rows.row(i) = (f_map.transpose() * c.normal).transpose();
      problem.linear_offsets(i) =
          options.min_intrinsic_force + normal_spread - c.normal.dot(f_off);
      if (bounded) {
        problem.linear_rows.row(ni + i) = -problem.linear_rows.row(i);
        problem.linear_offsets(ni + i) =
            normal_spread + c.normal.dot(f_off) - options.max_intrinsic_force;
      }
    }
  }
  for (Eigen::Index k = 0; k < d; ++k) {
    problem.linear_rows(box0 + 2 * k, k) = 1.0;
    problem.linear_offsets(box0 + 2 * k) = -options.coordinate_bound;
    problem.linear_rows(box0 + 2 * k + 1, k) = -1.0;
    problem.linear_offsets(box0 + 2 * k + 1) = -options.coordinate_bound;
  }

  BaselinePlan out;
  const auto start = std::chrono::steady_clock::now();
  const SocpResult res = socp_solve(problem, options.solver);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.newton_steps = res.newton_steps;
  if (res.status != SocpStatus::Optimal) return out;

  ForcePlan& plan = out.plan;
  plan.feasible = true;
  plan.lp_status = LpStatus::Optimal;
  plan.center = res.z;
  plan.forces = from_fe_coords(plane, res.z);
  plan.objective = res.objective;
  plan.margin = problem.min_margin(res.z);
  for (Eigen::Index i = 0; i < n; ++i) plan.desired_forces.emplace_back(plan.forces.segment<3>(3 * i));
  return out;
}

}  // namespace geodex
