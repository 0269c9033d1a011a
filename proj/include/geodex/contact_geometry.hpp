#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace geodex {

using Vector6d = Eigen::Matrix<double, 6, 1>;

enum class ContactKind { Intrinsic, Extrinsic };

/// Point contact on the object. The normal points into the object, so a
/// pushing contact force has a positive component along it.
struct Contact {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double friction_coefficient = 0.0;
  ContactKind kind = ContactKind::Intrinsic;
  /// Normal-force measurement standard deviation [N]. Infinite for extrinsic
  /// contacts, which carry no sensor.
  double measurement_sigma = std::numeric_limits<double>::infinity();
  std::string name;

  static Contact intrinsic(const Eigen::Vector3d& position, const Eigen::Vector3d& normal,
                           double mu, double sigma, std::string name = {});
  static Contact extrinsic(const Eigen::Vector3d& position, const Eigen::Vector3d& normal,
                           double mu, std::string name = {});
};

/// Ordered contact list: intrinsic contacts first, then extrinsic, each group
/// keeping its input order.
class ContactSet {
 public:
  ContactSet() = default;
  explicit ContactSet(std::vector<Contact> contacts);

  const std::vector<Contact>& contacts() const { return contacts_; }
  const Contact& operator[](std::size_t i) const { return contacts_[i]; }
  std::size_t size() const { return contacts_.size(); }
  std::size_t intrinsic_count() const { return n_intrinsic_; }
  std::size_t extrinsic_count() const { return contacts_.size() - n_intrinsic_; }
  /// Dimension of the stacked contact-force space, 3 per contact.
  Eigen::Index force_dim() const { return static_cast<Eigen::Index>(3 * contacts_.size()); }

 private:
  std::vector<Contact> contacts_;
  std::size_t n_intrinsic_ = 0;
};

struct ObjectModel {
  double mass = 1.0;
  Eigen::Vector3d center_of_mass = Eigen::Vector3d::Zero();
  Eigen::Vector3d gravity_acceleration{0.0, 0.0, -9.81};

  void validate() const;
};

/// Linear half-space set {f : matrix * f >= offsets}.
struct ConstraintSet {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offsets;

  Eigen::Index rows() const { return matrix.rows(); }
  /// Smallest value of matrix * f - offsets; +inf for an empty set.
  double min_slack(const Eigen::VectorXd& f) const;
  bool contains(const Eigen::VectorXd& f, double tol = 0.0) const { return min_slack(f) >= -tol; }
};

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Writes `normal` into block `contact_index` of a zero force-space vector.
Eigen::VectorXd extend(const Eigen::Vector3d& normal, std::size_t contact_index,
                       std::size_t total_contacts);

/// Gravity wrench about the center of mass: (m * g_acc, 0).
Vector6d build_gravity_wrench(const ObjectModel& object);

/// Stacked (3n x 6) matrix whose transpose maps contact forces to the net
/// wrench about the center of mass. Per contact the transpose block is
/// [I; skew(p - com)].
Eigen::MatrixXd build_equilibrium_matrix(const ContactSet& contacts, const ObjectModel& object);

/// Net wrench about the center of mass from stacked contact forces.
Vector6d net_contact_wrench(const ContactSet& contacts, const ObjectModel& object,
                            const Eigen::VectorXd& forces);

/// Orthonormal tangent pair (t1, t2) with t1 x t2 = normal. Seeds from the
/// lowest-index axis least aligned with the normal.
std::pair<Eigen::Vector3d, Eigen::Vector3d> tangent_frame(const Eigen::Vector3d& normal);

/// Inscribed `sides`-sided pyramid of the friction cone, one 3-wide row per
/// facet. Row j is mu*cos(pi/k)*n - (cos(a_j) t1 + sin(a_j) t2), a_j = 2*pi*j/k,
/// so each pyramid edge lies on the exact cone.
Eigen::MatrixXd linearize_friction_cone(const Contact& contact, int sides = 12);

/// Friction pyramids for every contact followed by one minimum normal force
/// row per intrinsic contact.
ConstraintSet build_constraint_set(const ContactSet& contacts, double min_intrinsic_force,
                                   int sides = 12);

/// Appends -n_i . f_i >= -max_force for every intrinsic contact. Bounds planned
/// forces to what the fingertip sensors can read; a non-finite bound adds nothing.
ConstraintSet append_max_force_rows(const ConstraintSet& cs, const ContactSet& contacts,
                                    double max_intrinsic_force);

}  // namespace geodex
