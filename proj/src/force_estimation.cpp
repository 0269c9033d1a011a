#include "geodex/force_estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace geodex {

MeasurementVector::MeasurementVector(const ContactSet& contacts,
                                     const Eigen::VectorXd& magnitudes) {
  if (magnitudes.size() != static_cast<Eigen::Index>(contacts.intrinsic_count())) {
    throw std::invalid_argument("measurement needs one magnitude per intrinsic contact");
  }
  magnitudes_ = magnitudes.cwiseMax(0.0);
  force_ = Eigen::VectorXd::Zero(contacts.force_dim());
  for (Eigen::Index j = 0; j < magnitudes_.size(); ++j) {
    force_.segment<3>(3 * j) = magnitudes_(j) * contacts[static_cast<std::size_t>(j)].normal;
  }
}

Eigen::VectorXd estimate_grasp_forces(const FEPlane& plane, const ContactSet& contacts,
                                      const MeasurementVector& m) {
  if (contacts.extrinsic_count() != 0) {
    throw std::logic_error(
        "estimate_grasp_forces: extrinsic contacts present, use estimate_extrinsic_forces");
  }
  if (m.force().size() != plane.force_dim()) {
    throw std::invalid_argument("estimate_grasp_forces: measurement and plane disagree");
  }
  return plane.project(m.force());
}

SubspaceBasis build_subspace_basis(const ContactSet& contacts) {
  const std::size_t ne = contacts.extrinsic_count();
  if (ne == 0) throw std::invalid_argument("build_subspace_basis: no extrinsic contacts");
  const std::size_t ni = contacts.intrinsic_count();
  SubspaceBasis out;
  out.raw.resize(contacts.force_dim(), static_cast<Eigen::Index>(ne));
  for (std::size_t i = 0; i < ne; ++i) {
    out.raw.col(static_cast<Eigen::Index>(i)) =
        extend(contacts[ni + i].normal, ni + i, contacts.size());
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(out.raw);
  out.basis = qr.householderQ() * Eigen::MatrixXd::Identity(out.raw.rows(), out.raw.cols());
  return out;
}

Eigen::VectorXd solve_nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           int max_iterations) {
  const Eigen::Index n = a.cols();
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * n + 10);
  const double tol = 1e-12 * std::max(1.0, a.norm() * std::max(1.0, b.norm()));

  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const Eigen::VectorXd sol = sub.completeOrthogonalDecomposition().solve(b);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) s(idx[k]) = sol(static_cast<Eigen::Index>(k));
    return s;
  };

  for (int outer = 0; outer < max_iterations; ++outer) {
    const Eigen::VectorXd grad = a.transpose() * (b - a * w);
    Eigen::Index best = -1;
    double best_value = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad(j) > best_value) {
        best = j;
        best_value = grad(j);
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    for (int inner = 0; inner <= n; ++inner) {
      const Eigen::VectorXd s = solve_passive();
      bool all_positive = true;
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0.0) {
          all_positive = false;
          const double denom = w(j) - s(j);
          if (denom > 0.0) alpha = std::min(alpha, w(j) / denom);
        }
      }
      if (all_positive) {
        w = s;
        break;
      }
      w += alpha * (s - w);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && w(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          w(j) = 0.0;
        }
      }
    }
  }
  return w;
}

ExtrinsicEstimate estimate_extrinsic_forces(const FEPlane& plane, const ContactSet& contacts,
                                            const MeasurementVector& m, double lambda) {
  if (contacts.extrinsic_count() == 0) {
    throw std::invalid_argument("estimate_extrinsic_forces: no extrinsic contacts");
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("estimate_extrinsic_forces: lambda < 0");
  if (m.force().size() != plane.force_dim()) {
    throw std::invalid_argument("estimate_extrinsic_forces: measurement and plane disagree");
  }
  const SubspaceBasis sub = build_subspace_basis(contacts);
  const Eigen::Index dim = plane.force_dim();
  const Eigen::MatrixXd proj = plane.basis.transpose() * plane.basis;
  const Eigen::MatrixXd off_plane = Eigen::MatrixXd::Identity(dim, dim) - proj;
  const Eigen::VectorXd u = m.force() - plane.particular;
  const double root_lambda = std::sqrt(lambda);

  // Stacked least-squares form of the objective in the weights.
  Eigen::MatrixXd a(2 * dim, sub.raw.cols());
  a.topRows(dim) = off_plane * sub.raw;
  a.bottomRows(dim) = root_lambda * (proj * sub.raw);
  Eigen::VectorXd b(2 * dim);
  b.head(dim) = -(off_plane * u);
  b.tail(dim) = -root_lambda * (plane.particular + proj * u);

  ExtrinsicEstimate out;
  out.weights = solve_nnls(a, b);
  out.objective = (a * out.weights - b).squaredNorm();
  out.forces = plane.project(m.force() + sub.raw * out.weights);
  return out;
}

}  // namespace geodex
