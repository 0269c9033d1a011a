#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geodex/contact_geometry.hpp"
#include "geodex/finger_model.hpp"
#include "geodex/force_planning.hpp"
#include "geodex/tactile_model.hpp"

namespace geodex {

enum class ScenarioKind { Grasp, Pivot };
enum class ObjectGeometry { Sphere, Box, Cylinder, Tool };
enum class FeedbackSource { Estimated, Raw };

const char* to_string(ScenarioKind kind);
const char* to_string(ObjectGeometry geometry);
const char* to_string(FeedbackSource source);

/// Bad scenario input. `field` is the dotted path of the offending key and
/// `line` its 1-based line in the source (0 if unknown).
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& origin, int line, std::string field, const std::string& what);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

struct ObjectConfig {
  ObjectGeometry geometry = ObjectGeometry::Box;
  double mass = 0.1;  // kg
  /// Body frame; contact positions share this frame.
  Eigen::Vector3d center_of_mass = Eigen::Vector3d::Zero();
  /// Bounding dimensions, informational only [m].
  Eigen::Vector3d size = Eigen::Vector3d::Zero();
};

/// Intrinsic contacts are fingertips: position and inward normal in the body
/// frame. Extrinsic contacts are environment supports: position in the body
/// frame, normal in the world frame (a fixed surface such as a table).
struct ContactConfig {
  std::string name;
  ContactKind kind = ContactKind::Intrinsic;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double friction = 0.5;
  double sigma = 0.5;  // N, intrinsic only
};

struct PlanningConfig {
  double min_force = 0.2;  // N
  double max_force = 20.0; // N
  int pyramid_sides = 12;
  PlanObjective objective = PlanObjective::MinNormalForce;
  double sigma_scale = 1.0;
};

struct ControllerConfig {
  /// K per finger, joint_count x joint_count, symmetric positive-definite.
  Eigen::MatrixXd gain = 50.0 * Eigen::Matrix3d::Identity();
  FeedbackSource feedback = FeedbackSource::Estimated;
  double deadband = 0.0;  // N
  double period = 0.01;   // s
  /// Throws std::invalid_argument unless K is symmetric positive-definite.
  void validate() const;
};

struct PlantConfig {
  double contact_stiffness = 5000.0;  // N/m
  FingerKind finger = FingerKind::Cartesian;
  bool tactile_noise = true;
  TaxelRanges taxels;
  TactileConfig tactile;
  int settle_iterations = 200;
  double settle_tolerance = 1e-6;
};

struct TrajectoryConfig {
  double duration = 4.0;  // s
  double lift_height = 0.0;
  double lift_start = 1.0;
  double lift_duration = 1.0;
  double start_angle_deg = 0.0;
  double end_angle_deg = 0.0;
  double hold = 1.0;  // s before the rotation starts
  double ramp = 2.0;  // s
  Eigen::Vector3d pivot_axis = -Eigen::Vector3d::UnitY();
  double slip_budget = 0.005;  // m of accumulated environment slip
  /// Internal squeeze added to the first plan to form the starting forces [N].
  double initial_squeeze = 1.0;
};

struct ScenarioConfig {
  std::string name;
  ScenarioKind kind = ScenarioKind::Grasp;
  std::uint64_t seed = 1;
  int repetitions = 1;
  ObjectConfig object;
  std::vector<ContactConfig> contacts;
  PlanningConfig planning;
  ControllerConfig controller;
  PlantConfig plant;
  TrajectoryConfig trajectory;
  double estimation_lambda = 1.0;
  double convergence_threshold = 0.15;  // N
  double success_angle_deg = 1.0;
  /// Exact input text, echoed into reports.
  std::string source_text;

  std::size_t intrinsic_count() const;
};

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<string>");
ScenarioConfig load_scenario(const std::string& path);

}  // namespace geodex
