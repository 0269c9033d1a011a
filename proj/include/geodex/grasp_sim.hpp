#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "geodex/contact_geometry.hpp"
#include "geodex/finger_model.hpp"
#include "geodex/force_planning.hpp"
#include "geodex/scenario.hpp"

namespace geodex {

/// Joint-space admittance direction K^-1 J^T e. The control loop adds
/// period * admittance_step(...) to the desired joint angles, so one step
/// moves a Cartesian fingertip by period / k * e.
Eigen::VectorXd admittance_step(const Eigen::VectorXd& e, const Eigen::MatrixXd& j,
                                const Eigen::MatrixXd& k);

/// Object-frame pose; the body origin need not be the center of mass.
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  Eigen::Vector3d apply(const Eigen::Vector3d& body_point) const {
    return position + orientation * body_point;
  }
};

/// One penalty contact between the object and a fingertip or the environment.
/// The spring runs from the material point on the object to `anchor`: the
/// fingertip position for fingers, a stick point on the surface for the
/// environment. Sliding moves the material point (fingers) or the stick
/// point (environment) until the force is back on the friction cone.
struct SimContact {
  std::string name;
  ContactKind kind = ContactKind::Intrinsic;
  Eigen::Vector3d body_point = Eigen::Vector3d::Zero();
  /// Body frame for fingers, world frame for the environment.
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
  double friction = 0.5;

  // Results of the last settle, world frame, force acting on the object.
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  double penetration = 0.0;
  bool active = false;
  double slip_distance = 0.0;

  bool environment() const { return kind == ContactKind::Extrinsic; }
};

struct PlantModel {
  double mass = 0.1;
  Eigen::Vector3d center_of_mass = Eigen::Vector3d::Zero();  // body frame
  Eigen::Vector3d gravity = Eigen::Vector3d(0.0, 0.0, -9.81);
  /// One finger per intrinsic contact, same order.
  std::vector<FingerModel> fingers;
  double contact_stiffness = 5000.0;
  int settle_iterations = 200;
  double settle_tolerance = 1e-6;
  int slip_rounds = 50;
};

struct PlantState {
  std::vector<Eigen::VectorXd> q;
  /// Hand-base translation added to every fingertip.
  Eigen::Vector3d hand_offset = Eigen::Vector3d::Zero();
  Pose pose;
  /// Intrinsic contacts first.
  std::vector<SimContact> contacts;
  bool settled = false;
  /// Norm of the net wrench about the center of mass after settling.
  double residual = 0.0;
  int settle_iterations = 0;
  int slip_events = 0;
};

/// World-frame normal pointing into the object.
Eigen::Vector3d world_normal(const SimContact& c, const Pose& pose);

/// Forces of all contacts at `pose` without changing anchors; returns the net
/// wrench (force, torque about the center of mass) including gravity.
Vector6d contact_wrench(const PlantModel& model, const Pose& pose,
                        std::vector<SimContact>& contacts);

/// Moves the object until the net wrench vanishes (damped Gauss-Newton on
/// the pose), then lets over-loaded contacts slide and repeats.
void settle(const PlantModel& model, PlantState& state);

/// Joints relax toward desired_q for dt, fingertips move, the object settles.
PlantState plant_step(const PlantModel& model, const PlantState& state,
                      const std::vector<Eigen::VectorXd>& desired_q, double dt);

/// Contact set at the current geometry, with measurement sigmas for the
/// intrinsic contacts.
ContactSet current_contacts(const PlantState& state, const std::vector<double>& sigmas);
ObjectModel current_object(const PlantModel& model, const PlantState& state);

struct StepRecord {
  double time = 0.0;
  std::vector<Eigen::Vector3d> desired, raw, estimated, truth;
  Pose pose;
  double angle_deg = 0.0;
  double target_angle_deg = 0.0;
  /// Mean per-finger norm of the feedback error.
  double error = 0.0;
  bool settled = false;
  double residual = 0.0;
};

struct RunReport {
  std::string scenario;
  ScenarioKind kind = ScenarioKind::Grasp;
  FeedbackSource feedback = FeedbackSource::Estimated;
  std::uint64_t seed = 0;
  Eigen::MatrixXd gain;
  double period = 0.0;
  std::vector<std::string> contact_names;
  std::vector<StepRecord> steps;
  std::vector<std::string> events;

  bool aborted = false;
  std::string abort_reason;
  /// Mean of StepRecord::error over the final 25% of steps.
  double final_error = 0.0;
  bool converged = false;
  double max_orientation_change_deg = 0.0;
  double rms_angle_error_deg = 0.0;
  double final_angle_error_deg = 0.0;
  bool success = false;
  double wall_seconds = 0.0;
  std::string config_echo;
};

/// Robust plan at the scenario's initial geometry.
struct ScenarioPlan {
  ContactSet contacts;
  ObjectModel object;
  std::optional<ForcePlan> plan;
  /// Why no plan exists, empty otherwise.
  std::string failure;
};
ScenarioPlan plan_scenario(const ScenarioConfig& config);

RunReport run_grasp_scenario(const ScenarioConfig& config);
RunReport run_pivot_scenario(const ScenarioConfig& config);
/// Dispatches on config.kind.
RunReport run_scenario(const ScenarioConfig& config);

}  // namespace geodex
