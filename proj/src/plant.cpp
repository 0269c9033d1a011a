#include "geodex/grasp_sim.hpp"

#include <cmath>
#include <stdexcept>

namespace geodex {

Eigen::VectorXd admittance_step(const Eigen::VectorXd& e, const Eigen::MatrixXd& j,
                                const Eigen::MatrixXd& k) {
  if (j.rows() != e.size() || k.rows() != j.cols() || k.cols() != j.cols()) {
    throw std::invalid_argument("admittance_step: inconsistent dimensions");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("admittance_step: gain is not positive-definite");
  }
  return llt.solve(j.transpose() * e);
}

Eigen::Vector3d world_normal(const SimContact& c, const Pose& pose) {
  return c.environment() ? c.normal : Eigen::Vector3d(pose.orientation * c.normal);
}

Vector6d contact_wrench(const PlantModel& model, const Pose& pose,
                        std::vector<SimContact>& contacts) {
  const Eigen::Vector3d com = pose.apply(model.center_of_mass);
  Vector6d w;
  w.head<3>() = model.mass * model.gravity;
  w.tail<3>().setZero();
  for (auto& c : contacts) {
    const Eigen::Vector3d point = pose.apply(c.body_point);
    const Eigen::Vector3d n = world_normal(c, pose);
    const Eigen::Vector3d d = c.anchor - point;
    c.penetration = d.dot(n);
    c.active = c.penetration > 0.0;
    c.force = c.active ? Eigen::Vector3d(model.contact_stiffness * d) : Eigen::Vector3d::Zero();
    w.head<3>() += c.force;
    w.tail<3>() += (point - com).cross(c.force);
  }
  return w;
}

namespace {

// Rotation by `omega` about the center of mass, then translation by `shift`.
Pose perturb(const Pose& pose, const Eigen::Vector3d& com_body, const Vector6d& delta) {
  const Eigen::Vector3d com = pose.apply(com_body);
  const Eigen::Vector3d omega = delta.tail<3>();
  const double angle = omega.norm();
  const Eigen::Quaterniond rot =
      angle > 0.0 ? Eigen::Quaterniond(Eigen::AngleAxisd(angle, omega / angle))
                  : Eigen::Quaterniond::Identity();
  Pose out;
  out.orientation = (rot * pose.orientation).normalized();
  out.position = com + delta.head<3>() - out.orientation * com_body;
  return out;
}

// Levenberg-Marquardt on the six pose increments.
void solve_pose(const PlantModel& model, PlantState& state) {
  auto& contacts = state.contacts;
  Vector6d r = contact_wrench(model, state.pose, contacts);
  double lambda = 1e-6;
  constexpr double kStep = 1e-7;
  for (int it = 0; it < model.settle_iterations && r.norm() > model.settle_tolerance; ++it) {
    ++state.settle_iterations;
    bool any_active = false;
    for (const auto& c : contacts) any_active = any_active || c.active;
    if (!any_active) break;

    Eigen::Matrix<double, 6, 6> jac;
    for (int k = 0; k < 6; ++k) {
      Vector6d delta = Vector6d::Zero();
      delta(k) = kStep;
      std::vector<SimContact> probe = contacts;
      jac.col(k) = (contact_wrench(model, perturb(state.pose, model.center_of_mass, delta), probe) - r) / kStep;
    }
    const Eigen::Matrix<double, 6, 6> jtj = jac.transpose() * jac;
    const Vector6d grad = jac.transpose() * r;
    const Vector6d scale = jtj.diagonal().cwiseMax(1e-12 * (1.0 + jtj.diagonal().maxCoeff()));
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      Eigen::Matrix<double, 6, 6> lhs = jtj;
      lhs.diagonal() += lambda * scale;
      const Vector6d delta = lhs.ldlt().solve(-grad);
      const Pose trial = perturb(state.pose, model.center_of_mass, delta);
      std::vector<SimContact> probe = contacts;
      const Vector6d rt = contact_wrench(model, trial, probe);
      if (rt.norm() < r.norm()) {
        state.pose = trial;
        contacts = std::move(probe);
        r = rt;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  state.residual = r.norm();
}

// Moves anchors of over-loaded contacts onto the friction cone. Returns true
// if anything slid.
bool relax_slip(PlantState& state) {
  bool slid = false;
  for (auto& c : state.contacts) {
    const Eigen::Vector3d point = state.pose.apply(c.body_point);
    const Eigen::Vector3d n = world_normal(c, state.pose);
    const Eigen::Vector3d d = c.anchor - point;
    const double pen = d.dot(n);
    const Eigen::Vector3d tangential = d - pen * n;
    const double limit = pen > 0.0 ? c.friction * pen : 0.0;
    const double t = tangential.norm();
    if (t <= limit * (1.0 + 1e-9) + 1e-15) continue;
    // Separated contacts drop their tangential offset entirely.
    const Eigen::Vector3d shift = tangential * (1.0 - limit / t);
    if (c.environment()) {
      c.anchor -= shift;
    } else {
      c.body_point = state.pose.orientation.conjugate() * (point + shift - state.pose.position);
    }
    if (pen > 0.0) {
      c.slip_distance += shift.norm();
      slid = true;
    }
  }
  return slid;
}

}  // namespace

void settle(const PlantModel& model, PlantState& state) {
  state.settle_iterations = 0;
  bool slid = false;
  for (int round = 0; round < model.slip_rounds; ++round) {
    solve_pose(model, state);
    slid = relax_slip(state);
    if (!slid) break;
    ++state.slip_events;
  }
  if (slid) solve_pose(model, state);
  Vector6d w = contact_wrench(model, state.pose, state.contacts);
  state.residual = w.norm();
  state.settled = state.residual <= model.settle_tolerance;
}

PlantState plant_step(const PlantModel& model, const PlantState& state,
                      const std::vector<Eigen::VectorXd>& desired_q, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("plant_step: dt must be positive");
  if (desired_q.size() != model.fingers.size() || state.q.size() != model.fingers.size()) {
    throw std::invalid_argument("plant_step: one joint vector per finger expected");
  }
  PlantState next = state;
  for (std::size_t i = 0; i < model.fingers.size(); ++i) {
    next.q[i] = model.fingers[i].track(state.q[i], desired_q[i], dt);
    next.contacts[i].anchor = model.fingers[i].forward(next.q[i]) + next.hand_offset;
  }
  settle(model, next);
  return next;
}

ContactSet current_contacts(const PlantState& state, const std::vector<double>& sigmas) {
  std::vector<Contact> out;
  std::size_t k = 0;
  for (const auto& c : state.contacts) {
    const Eigen::Vector3d p = state.pose.apply(c.body_point);
    const Eigen::Vector3d n = world_normal(c, state.pose).normalized();
    if (c.environment()) {
      out.push_back(Contact::extrinsic(p, n, c.friction, c.name));
    } else {
      if (k >= sigmas.size()) throw std::invalid_argument("current_contacts: missing sigma");
      out.push_back(Contact::intrinsic(p, n, c.friction, sigmas[k++], c.name));
    }
  }
  return ContactSet(std::move(out));
}

ObjectModel current_object(const PlantModel& model, const PlantState& state) {
  ObjectModel o;
  o.mass = model.mass;
  o.center_of_mass = state.pose.apply(model.center_of_mass);
  o.gravity_acceleration = model.gravity;
  return o;
}

}  // namespace geodex
