#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "geodex/contact_geometry.hpp"

namespace geodex {

/// Thrown when gravity cannot be balanced by any combination of contact forces.
class NoEquilibriumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Affine subspace of stacked contact forces satisfying A^T f = -g.
///
/// `basis` has orthonormal rows spanning null(A^T); `particular` is the
/// minimum-norm solution. Coordinates are x = basis * (f - particular).
struct FEPlane {
  Eigen::MatrixXd basis;
  Eigen::VectorXd particular;
  Eigen::Index dimension = 0;
  Eigen::MatrixXd a_fe;
  Vector6d gravity_wrench = Vector6d::Zero();

  Eigen::Index force_dim() const { return particular.size(); }
  /// ||A^T f + g||.
  double equilibrium_residual(const Eigen::VectorXd& f) const;
  /// Orthogonal projection of a force-space vector onto the plane.
  Eigen::VectorXd project(const Eigen::VectorXd& f) const;
};

/// Relative singular-value cutoff used for the numerical rank.
inline constexpr double kRankTolerance = 1e-9;

FEPlane compute_fe_plane(const ContactSet& contacts, const ObjectModel& object);

Eigen::VectorXd to_fe_coords(const FEPlane& plane, const Eigen::VectorXd& f);
Eigen::VectorXd from_fe_coords(const FEPlane& plane, const Eigen::VectorXd& x);

/// Substitutes f = basis^T x + f0 into C f >= d, giving (C basis^T) x >= d - C f0.
ConstraintSet transform_constraints(const FEPlane& plane, const ConstraintSet& cs);

}  // namespace geodex
