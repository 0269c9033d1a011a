#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "geodex/contact_geometry.hpp"
#include "geodex/fe_subspace.hpp"
#include "geodex/lp_solver.hpp"
#include "geodex/socp_solver.hpp"

namespace geodex {

/// Measurement uncertainty of a contact set and its image on the FE-plane.
struct UncertaintyModel {
  Eigen::VectorXd sigmas;
  /// Diagonal of D: 1/sigma^2 for intrinsic contacts, 0 for extrinsic ones.
  Eigen::VectorXd d_diag;
  /// Map from normal-force weights m to FE-coordinates, x = e_hat * m.
  Eigen::MatrixXd e_hat;
  /// Ellipsoid shape on the FE-plane, (x - c)^T M (x - c) <= 1.
  Eigen::MatrixXd m;
  /// Pseudo-inverse of M, the support-function matrix of the ellipsoid.
  Eigen::MatrixXd m_pinv;
};

/// Diagonal of D. Throws if an intrinsic sigma is not strictly positive.
Eigen::VectorXd build_measurement_ellipsoid(const ContactSet& contacts);

/// Force-space matrix whose columns are extend(n_j) for every contact.
Eigen::MatrixXd measurement_cone_matrix(const ContactSet& contacts);

/// M = (E^+)^T D E^+ with E = basis * N_mcone.
UncertaintyModel propagate_ellipsoid(const FEPlane& plane, const ContactSet& contacts,
                                     const Eigen::VectorXd& d_diag);

/// build_measurement_ellipsoid followed by propagate_ellipsoid.
UncertaintyModel build_uncertainty(const FEPlane& plane, const ContactSet& contacts);

/// Moore-Penrose pseudo-inverse of a symmetric matrix, eigenvalues below
/// `rel_tol * max |eigenvalue|` treated as zero.
Eigen::MatrixXd symmetric_pinv(const Eigen::MatrixXd& m, double rel_tol = 1e-12);

struct TightenedConstraints {
  ConstraintSet set;
  /// Per-row offset increase sqrt(a^T M^+ a).
  Eigen::VectorXd widths;
  /// Rows with a component in null(M). Their support is evaluated on range(M).
  int null_direction_rows = 0;
};

/// Each row a^T x >= d becomes a^T c >= d + sqrt(a^T M^+ a), so every point of
/// {(x - c)^T M (x - c) <= 1} satisfies the original row when c does.
TightenedConstraints tighten_constraints(const ConstraintSet& cs_fe, const Eigen::MatrixXd& m);
TightenedConstraints tighten_constraints(const ConstraintSet& cs_fe,
                                         const UncertaintyModel& uncertainty);

enum class PlanObjective {
  Feasibility,     ///< min 0
  MinNormalForce,  ///< min sum_i n_i . f_i(c)
};

struct ForcePlan {
  bool feasible = false;
  Eigen::VectorXd center;
  /// Stacked planned forces; desired_forces[i] is the block of contact i.
  Eigen::VectorXd forces;
  std::vector<Eigen::Vector3d> desired_forces;
  /// Smallest slack of the tightened rows at the center [N].
  double margin = 0.0;
  double objective = 0.0;
  int null_direction_rows = 0;
  LpStatus lp_status = LpStatus::Infeasible;
  int pivots = 0;
};

/// Row vector q with q . c = sum_i n_i . f_i(c) - sum_i n_i . f0_i.
Eigen::VectorXd normal_force_objective(const FEPlane& plane, const ContactSet& contacts);

ForcePlan plan_grasp_forces(const FEPlane& plane, const ConstraintSet& cs,
                            const ContactSet& contacts, const UncertaintyModel& uncertainty,
                            PlanObjective objective = PlanObjective::Feasibility);

ForcePlan plan_extrinsic_forces(const FEPlane& plane, const ConstraintSet& cs,
                                const ContactSet& contacts, const UncertaintyModel& uncertainty);

struct BaselineOptions {
  double min_intrinsic_force = 0.0;
  double max_intrinsic_force = std::numeric_limits<double>::infinity();
  /// Box on every FE-coordinate, keeps the barrier bounded.
  double coordinate_bound = 1e4;
  SocpOptions solver;
};

struct BaselinePlan {
  ForcePlan plan;
  double seconds = 0.0;
  int newton_steps = 0;
};

/// Robust plan with exact quadratic friction cones. Per contact, with E_i the
/// force-space image of the ellipsoid and T_i the tangent projection,
///   ||T_i f_i(c)|| + max_{|u|=1} ||E_i^T (T_i^T u + mu_i n_i)|| <= mu_i n_i . f_i(c),
/// and n_i . f_i(c) - ||E_i^T n_i|| >= f_min at intrinsic contacts. Minimises the
/// total normal force. `seconds` is wall-clock time of the solver call.
BaselinePlan socp_baseline_plan(const FEPlane& plane, const ContactSet& contacts,
                                const ObjectModel& object, const UncertaintyModel& uncertainty,
                                const BaselineOptions& options);

}  // namespace geodex
