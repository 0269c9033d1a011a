#pragma once

#include <Eigen/Dense>

namespace geodex {

enum class FingerKind { Cartesian, Serial4 };

/// Kinematics of one finger. Joint positions are realized by an overdamped
/// joint PD: q relaxes toward q_des with time constant pd_kd / pd_kp.
class FingerModel {
 public:
  /// Three prismatic joints along the world axes; fingertip = base + q.
  static FingerModel cartesian(const Eigen::Vector3d& base);
  /// Abduction about the base z axis followed by three flexion joints about
  /// the rotated y axis. `base_rotation` orients the chain in the world.
  static FingerModel serial4(const Eigen::Vector3d& base, const Eigen::Matrix3d& base_rotation,
                             const Eigen::Vector4d& link_lengths = {0.0, 0.054, 0.038, 0.044});

  FingerKind kind() const { return kind_; }
  int joint_count() const { return kind_ == FingerKind::Cartesian ? 3 : 4; }

  Eigen::Vector3d forward(const Eigen::VectorXd& q) const;
  /// 3 x joint_count.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& q) const;
  /// Damped least-squares inverse kinematics started from q0; joint limits
  /// are enforced after every step.
  Eigen::VectorXd inverse(const Eigen::Vector3d& target, Eigen::VectorXd q0,
                          double damping = 1e-3, int max_iterations = 200,
                          double tolerance = 1e-9) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& q) const;
  /// One joint-PD period of length dt.
  Eigen::VectorXd track(const Eigen::VectorXd& q, const Eigen::VectorXd& q_des, double dt) const;

  const Eigen::Vector3d& base() const { return base_; }
  void set_base(const Eigen::Vector3d& base) { base_ = base; }

  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double pd_kp = 100.0;
  double pd_kd = 0.01;

 private:
  FingerKind kind_ = FingerKind::Cartesian;
  Eigen::Vector3d base_ = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector4d links_ = Eigen::Vector4d::Zero();
};

}  // namespace geodex
