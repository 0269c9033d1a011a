#pragma once

#include <vector>

#include <Eigen/Dense>

#include "geodex/contact_geometry.hpp"
#include "geodex/fe_subspace.hpp"

namespace geodex {

/// Normal-force magnitudes read at the intrinsic contacts. Negative readings
/// are clamped to zero on construction.
class MeasurementVector {
 public:
  MeasurementVector(const ContactSet& contacts, const Eigen::VectorXd& magnitudes);

  const Eigen::VectorXd& magnitudes() const { return magnitudes_; }
  /// sum_j m_j * extend(n_j) over the intrinsic contacts.
  const Eigen::VectorXd& force() const { return force_; }

 private:
  Eigen::VectorXd magnitudes_;
  Eigen::VectorXd force_;
};

/// Orthonormal basis of the directions the unmeasured extrinsic normals add to
/// an intrinsic reading. Columns of `raw` are extend(n_e) per extrinsic contact.
struct SubspaceBasis {
  Eigen::MatrixXd basis;
  Eigen::MatrixXd raw;
};

/// Projects the measured force onto the FE-plane. Only valid without
/// extrinsic contacts.
Eigen::VectorXd estimate_grasp_forces(const FEPlane& plane, const ContactSet& contacts,
                                      const MeasurementVector& m);

SubspaceBasis build_subspace_basis(const ContactSet& contacts);

struct ExtrinsicEstimate {
  Eigen::VectorXd forces;
  /// Non-negative weights on the extrinsic normal directions.
  Eigen::VectorXd weights;
  double objective = 0.0;
};

/// Picks w >= 0 minimising
///   ||v(w) - P(v(w))||^2 + lambda * ||P(v(w))||^2,  v(w) = f_m + sum_i w_i extend(n_e_i),
/// with P the orthogonal projection onto the FE-plane, and returns P(v(w*)).
ExtrinsicEstimate estimate_extrinsic_forces(const FEPlane& plane, const ContactSet& contacts,
                                            const MeasurementVector& m, double lambda = 1.0);

/// Non-negative least squares min ||A w - b|| s.t. w >= 0 (Lawson-Hanson
/// active set).
Eigen::VectorXd solve_nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           int max_iterations = 0);

}  // namespace geodex
