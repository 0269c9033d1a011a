#include "geodex/fe_subspace.hpp"

#include <algorithm>
#include <stdexcept>

namespace geodex {

double FEPlane::equilibrium_residual(const Eigen::VectorXd& f) const {
  return (a_fe.transpose() * f + gravity_wrench).norm();
}

Eigen::VectorXd FEPlane::project(const Eigen::VectorXd& f) const {
  return from_fe_coords(*this, to_fe_coords(*this, f));
}

FEPlane compute_fe_plane(const ContactSet& contacts, const ObjectModel& object) {
  object.validate();
  FEPlane plane;
  plane.a_fe = build_equilibrium_matrix(contacts, object);
  plane.gravity_wrench = build_gravity_wrench(object);

  // SVD of A^T (6 x 3n): right singular vectors past the numerical rank span
  // the null space.
  const Eigen::MatrixXd at = plane.a_fe.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(at, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = kRankTolerance * (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;

  const Eigen::Index n = at.cols();
  plane.dimension = n - rank;
  plane.basis = svd.matrixV().rightCols(plane.dimension).transpose();

  // Minimum-norm solution of A^T f = -g through the truncated pseudo-inverse.
  const Eigen::VectorXd rhs = -plane.gravity_wrench;
  Eigen::VectorXd coeffs = svd.matrixU().leftCols(rank).transpose() * rhs;
  coeffs.array() /= sv.head(rank).array();
  plane.particular = svd.matrixV().leftCols(rank) * coeffs;

  const double residual = plane.equilibrium_residual(plane.particular);
  if (residual > 1e-8 * std::max(1.0, plane.gravity_wrench.norm())) {
    throw NoEquilibriumError("no equilibrium exists: gravity wrench is outside the span of the "
                             "contact wrenches (residual " + std::to_string(residual) + ")");
  }
  return plane;
}

Eigen::VectorXd to_fe_coords(const FEPlane& plane, const Eigen::VectorXd& f) {
  if (f.size() != plane.force_dim()) {
    throw std::invalid_argument("to_fe_coords: force vector has wrong dimension");
  }
  return plane.basis * (f - plane.particular);
}

Eigen::VectorXd from_fe_coords(const FEPlane& plane, const Eigen::VectorXd& x) {
  if (x.size() != plane.dimension) {
    throw std::invalid_argument("from_fe_coords: coordinate vector has wrong dimension");
  }
  return plane.basis.transpose() * x + plane.particular;
}

ConstraintSet transform_constraints(const FEPlane& plane, const ConstraintSet& cs) {
  if (cs.matrix.cols() != plane.force_dim() || cs.offsets.size() != cs.matrix.rows()) {
    throw std::invalid_argument("transform_constraints: constraint set has wrong dimension");
  }
  ConstraintSet out;
  out.matrix = cs.matrix * plane.basis.transpose();
  out.offsets = cs.offsets - cs.matrix * plane.particular;
  return out;
}

}  // namespace geodex
