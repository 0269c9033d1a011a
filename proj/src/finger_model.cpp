#include "geodex/finger_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace geodex {

FingerModel FingerModel::cartesian(const Eigen::Vector3d& base) {
  FingerModel f;
  f.kind_ = FingerKind::Cartesian;
  f.base_ = base;
  f.lower = Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity());
  f.upper = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  return f;
}

FingerModel FingerModel::serial4(const Eigen::Vector3d& base, const Eigen::Matrix3d& base_rotation,
                                 const Eigen::Vector4d& link_lengths) {
  FingerModel f;
  f.kind_ = FingerKind::Serial4;
  f.base_ = base;
  f.rotation_ = base_rotation;
  f.links_ = link_lengths;
  f.lower = Eigen::Vector4d(-0.47, -0.196, -0.174, -0.227);
  f.upper = Eigen::Vector4d(0.47, 1.61, 1.709, 1.618);
  return f;
}

Eigen::Vector3d FingerModel::forward(const Eigen::VectorXd& q) const {
  if (q.size() != joint_count()) throw std::invalid_argument("finger: wrong joint count");
  if (kind_ == FingerKind::Cartesian) return base_ + q;
  // Planar chain in the abducted x-z plane; flexion bends toward -z.
  double angle = 0.0, reach = links_(0), drop = 0.0;
  for (int j = 1; j < 4; ++j) {
    angle += q(j);
    reach += links_(j) * std::cos(angle);
    drop += links_(j) * std::sin(angle);
  }
  const Eigen::Vector3d local(reach * std::cos(q(0)), reach * std::sin(q(0)), -drop);
  return base_ + rotation_ * local;
}

Eigen::MatrixXd FingerModel::jacobian(const Eigen::VectorXd& q) const {
  if (q.size() != joint_count()) throw std::invalid_argument("finger: wrong joint count");
  if (kind_ == FingerKind::Cartesian) return Eigen::Matrix3d::Identity();
  double angle = 0.0, reach = links_(0);
  Eigen::Vector3d cum_angle;
  for (int j = 1; j < 4; ++j) {
    angle += q(j);
    cum_angle(j - 1) = angle;
    reach += links_(j) * std::cos(angle);
  }
  const double c0 = std::cos(q(0)), s0 = std::sin(q(0));
  Eigen::MatrixXd local(3, 4);
  local.col(0) << -reach * s0, reach * c0, 0.0;
  for (int j = 1; j < 4; ++j) {
    // Joint j moves every link from j onward.
    double d_reach = 0.0, d_drop = 0.0;
    for (int l = j; l < 4; ++l) {
      d_reach -= links_(l) * std::sin(cum_angle(l - 1));
      d_drop += links_(l) * std::cos(cum_angle(l - 1));
    }
    local.col(j) << d_reach * c0, d_reach * s0, -d_drop;
  }
  return rotation_ * local;
}

Eigen::VectorXd FingerModel::clamp(const Eigen::VectorXd& q) const {
  return q.cwiseMax(lower).cwiseMin(upper);
}

Eigen::VectorXd FingerModel::inverse(const Eigen::Vector3d& target, Eigen::VectorXd q,
                                     double damping, int max_iterations, double tolerance) const {
  q = clamp(q);
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::Vector3d err = target - forward(q);
    if (err.norm() <= tolerance) break;
    const Eigen::MatrixXd j = jacobian(q);
    const Eigen::Matrix3d jjt = j * j.transpose() + damping * damping * Eigen::Matrix3d::Identity();
    q = clamp(q + j.transpose() * jjt.ldlt().solve(err));
  }
  return q;
}

Eigen::VectorXd FingerModel::track(const Eigen::VectorXd& q, const Eigen::VectorXd& q_des,
                                   double dt) const {
  const double blend = 1.0 - std::exp(-dt * pd_kp / pd_kd);
  return clamp(q + blend * (q_des - q));
}

}  // namespace geodex
