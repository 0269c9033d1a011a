#include "geodex/contact_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace geodex {

namespace {

constexpr double kUnitTolerance = 1e-9;

void validate_contact(const Contact& c) {
  if (!c.position.allFinite() || !c.normal.allFinite()) {
    throw std::invalid_argument("contact '" + c.name + "': non-finite position or normal");
  }
  if (std::abs(c.normal.norm() - 1.0) > kUnitTolerance) {
    throw std::invalid_argument("contact '" + c.name + "': normal is not unit length");
  }
  if (!(c.friction_coefficient >= 0.0)) {
    throw std::invalid_argument("contact '" + c.name + "': negative friction coefficient");
  }
  if (c.kind == ContactKind::Extrinsic && std::isfinite(c.measurement_sigma)) {
    throw std::invalid_argument("contact '" + c.name +
                                "': extrinsic contacts carry no measurement sigma");
  }
}

}  // namespace

Contact Contact::intrinsic(const Eigen::Vector3d& position, const Eigen::Vector3d& normal,
                           double mu, double sigma, std::string name) {
  return Contact{position, normal, mu, ContactKind::Intrinsic, sigma, std::move(name)};
}

Contact Contact::extrinsic(const Eigen::Vector3d& position, const Eigen::Vector3d& normal,
                           double mu, std::string name) {
  return Contact{position, normal, mu, ContactKind::Extrinsic,
                 std::numeric_limits<double>::infinity(), std::move(name)};
}

ContactSet::ContactSet(std::vector<Contact> contacts) {
  if (contacts.empty()) {
    throw std::invalid_argument("contact set must contain at least one contact");
  }
  for (const auto& c : contacts) validate_contact(c);
  std::stable_partition(contacts.begin(), contacts.end(),
                        [](const Contact& c) { return c.kind == ContactKind::Intrinsic; });
  n_intrinsic_ = static_cast<std::size_t>(
      std::count_if(contacts.begin(), contacts.end(),
                    [](const Contact& c) { return c.kind == ContactKind::Intrinsic; }));
  contacts_ = std::move(contacts);
}

void ObjectModel::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("object mass must be positive");
  if (!center_of_mass.allFinite() || !gravity_acceleration.allFinite()) {
    throw std::invalid_argument("object center of mass and gravity must be finite");
  }
}

double ConstraintSet::min_slack(const Eigen::VectorXd& f) const {
  if (matrix.rows() == 0) return std::numeric_limits<double>::infinity();
  return (matrix * f - offsets).minCoeff();
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return s;
}

Eigen::VectorXd extend(const Eigen::Vector3d& normal, std::size_t contact_index,
                       std::size_t total_contacts) {
  if (contact_index >= total_contacts) {
    throw std::invalid_argument("extend: contact index out of range");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * total_contacts));
  out.segment<3>(static_cast<Eigen::Index>(3 * contact_index)) = normal;
  return out;
}

Vector6d build_gravity_wrench(const ObjectModel& object) {
  Vector6d g;
  g.head<3>() = object.mass * object.gravity_acceleration;
  g.tail<3>().setZero();
  return g;
}

Eigen::MatrixXd build_equilibrium_matrix(const ContactSet& contacts, const ObjectModel& object) {
  Eigen::MatrixXd a(contacts.force_dim(), 6);
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(3 * i);
    a.block<3, 3>(row, 0).setIdentity();
    a.block<3, 3>(row, 3) = skew(contacts[i].position - object.center_of_mass).transpose();
  }
  return a;
}

Vector6d net_contact_wrench(const ContactSet& contacts, const ObjectModel& object,
                            const Eigen::VectorXd& forces) {
  if (forces.size() != contacts.force_dim()) {
    throw std::invalid_argument("net_contact_wrench: force vector has wrong dimension");
  }
  Vector6d w = Vector6d::Zero();
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const Eigen::Vector3d f = forces.segment<3>(static_cast<Eigen::Index>(3 * i));
    w.head<3>() += f;
    w.tail<3>() += (contacts[i].position - object.center_of_mass).cross(f);
  }
  return w;
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> tangent_frame(const Eigen::Vector3d& normal) {
  Eigen::Index seed = 0;
  normal.cwiseAbs().minCoeff(&seed);
  const Eigen::Vector3d axis = Eigen::Vector3d::Unit(seed);
  const Eigen::Vector3d t1 = (axis - axis.dot(normal) * normal).normalized();
  const Eigen::Vector3d t2 = normal.cross(t1);
  return {t1, t2};
}

Eigen::MatrixXd linearize_friction_cone(const Contact& contact, int sides) {
  if (sides < 3) throw std::invalid_argument("friction pyramid needs at least 3 sides");
  if (!(contact.friction_coefficient >= 0.0)) {
    throw std::invalid_argument("friction coefficient must be non-negative");
  }
  const auto [t1, t2] = tangent_frame(contact.normal);
  const double inner = contact.friction_coefficient * std::cos(std::numbers::pi / sides);
  Eigen::MatrixXd rows(sides, 3);
  for (int j = 0; j < sides; ++j) {
    const double angle = 2.0 * std::numbers::pi * j / sides;
    const Eigen::Vector3d dir = std::cos(angle) * t1 + std::sin(angle) * t2;
    rows.row(j) = (inner * contact.normal - dir).transpose();
  }
  return rows;
}

ConstraintSet build_constraint_set(const ContactSet& contacts, double min_intrinsic_force,
                                   int sides) {
  if (!(min_intrinsic_force >= 0.0)) {
    throw std::invalid_argument("minimum intrinsic force must be non-negative");
  }
  const auto n = static_cast<Eigen::Index>(contacts.size());
  const auto ni = static_cast<Eigen::Index>(contacts.intrinsic_count());
  ConstraintSet cs;
  cs.matrix = Eigen::MatrixXd::Zero(sides * n + ni, contacts.force_dim());
  cs.offsets = Eigen::VectorXd::Zero(sides * n + ni);
  for (Eigen::Index i = 0; i < n; ++i) {
    cs.matrix.block(i * sides, 3 * i, sides, 3) =
        linearize_friction_cone(contacts[static_cast<std::size_t>(i)], sides);
  }
  for (Eigen::Index i = 0; i < ni; ++i) {
    cs.matrix.block<1, 3>(sides * n + i, 3 * i) =
        contacts[static_cast<std::size_t>(i)].normal.transpose();
    cs.offsets(sides * n + i) = min_intrinsic_force;
  }
  return cs;
}

ConstraintSet append_max_force_rows(const ConstraintSet& cs, const ContactSet& contacts,
                                    double max_intrinsic_force) {
  if (!std::isfinite(max_intrinsic_force)) return cs;
  const auto ni = static_cast<Eigen::Index>(contacts.intrinsic_count());
  ConstraintSet out;
  out.matrix = Eigen::MatrixXd::Zero(cs.rows() + ni, contacts.force_dim());
  out.offsets = Eigen::VectorXd::Zero(cs.rows() + ni);
  out.matrix.topRows(cs.rows()) = cs.matrix;
  out.offsets.head(cs.rows()) = cs.offsets;
  for (Eigen::Index i = 0; i < ni; ++i) {
    out.matrix.block<1, 3>(cs.rows() + i, 3 * i) =
        -contacts[static_cast<std::size_t>(i)].normal.transpose();
    out.offsets(cs.rows() + i) = -max_intrinsic_force;
  }
  return out;
}

}  // namespace geodex
