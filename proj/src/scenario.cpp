#include "geodex/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace geodex {

const char* to_string(ScenarioKind kind) {
  return kind == ScenarioKind::Grasp ? "grasp" : "pivot";
}

const char* to_string(ObjectGeometry geometry) {
  switch (geometry) {
    case ObjectGeometry::Sphere: return "sphere";
    case ObjectGeometry::Box: return "box";
    case ObjectGeometry::Cylinder: return "cylinder";
    case ObjectGeometry::Tool: return "tool";
  }
  return "unknown";
}

const char* to_string(FeedbackSource source) {
  return source == FeedbackSource::Estimated ? "estimated" : "raw";
}

ScenarioError::ScenarioError(const std::string& origin, int line, std::string field,
                             const std::string& what)
    : std::runtime_error(origin + ":" + std::to_string(line) + ": " + field + ": " + what),
      field_(std::move(field)), line_(line) {}

void ControllerConfig::validate() const {
  if (gain.rows() == 0 || gain.rows() != gain.cols()) {
    throw std::invalid_argument("controller gain must be a non-empty square matrix");
  }
  if (!gain.isApprox(gain.transpose(), 1e-12)) {
    throw std::invalid_argument("controller gain must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gain);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument("controller gain must be positive-definite");
  }
  if (!(period > 0.0)) throw std::invalid_argument("controller period must be positive");
  if (!(deadband >= 0.0)) throw std::invalid_argument("controller deadband must be non-negative");
}

std::size_t ScenarioConfig::intrinsic_count() const {
  std::size_t n = 0;
  for (const auto& c : contacts) n += c.kind == ContactKind::Intrinsic;
  return n;
}

namespace {

// Walks one mapping, remembers which keys were read and rejects the rest.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, const std::string& origin)
      : node_(node), path_(std::move(path)), origin_(origin) {
    if (node_ && node_.IsNull()) node_ = YAML::Node(YAML::NodeType::Undefined);
    if (node_ && !node_.IsMap()) fail(path_, node_, "expected a mapping");
  }

  bool has(const std::string& key) const { return node_ && node_[key]; }

  [[noreturn]] void fail(const std::string& field, const YAML::Node& at,
                         const std::string& what) const {
    const int line = at && at.Mark().line >= 0 ? at.Mark().line + 1 : line_of_section();
    throw ScenarioError(origin_, line, field, what);
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  YAML::Node child(const std::string& key, bool required) {
    seen_.insert(key);
    YAML::Node n = node_ ? node_[key] : YAML::Node(YAML::NodeType::Undefined);
    if (!n && required) fail(field(key), node_, "missing required field");
    return n;
  }

  double number(const std::string& key, double fallback, bool required = false,
                bool positive = false, bool non_negative = false) {
    const YAML::Node n = child(key, required);
    if (!n) return fallback;
    double v = 0.0;
    try {
      v = n.as<double>();
    } catch (const YAML::Exception&) {
      fail(field(key), n, "expected a number");
    }
    if (!std::isfinite(v)) fail(field(key), n, "must be finite");
    if (positive && !(v > 0.0)) fail(field(key), n, "must be positive");
    if (non_negative && !(v >= 0.0)) fail(field(key), n, "must be non-negative");
    return v;
  }

  int integer(const std::string& key, int fallback, int minimum) {
    const YAML::Node n = child(key, false);
    if (!n) return fallback;
    long long v = 0;
    try {
      v = n.as<long long>();
    } catch (const YAML::Exception&) {
      fail(field(key), n, "expected an integer");
    }
    if (v < minimum) fail(field(key), n, "must be at least " + std::to_string(minimum));
    return static_cast<int>(v);
  }

  bool boolean(const std::string& key, bool fallback) {
    const YAML::Node n = child(key, false);
    if (!n) return fallback;
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(field(key), n, "expected true or false");
    }
  }

  std::string text(const std::string& key, const std::string& fallback, bool required = false) {
    const YAML::Node n = child(key, required);
    if (!n) return fallback;
    if (!n.IsScalar()) fail(field(key), n, "expected a string");
    return n.as<std::string>();
  }

  Eigen::Vector3d vec3(const std::string& key, const Eigen::Vector3d& fallback,
                       bool required = false) {
    const YAML::Node n = child(key, required);
    if (!n) return fallback;
    if (!n.IsSequence() || n.size() != 3) fail(field(key), n, "expected a list of 3 numbers");
    Eigen::Vector3d v;
    for (std::size_t i = 0; i < 3; ++i) {
      try {
        v(static_cast<Eigen::Index>(i)) = n[i].as<double>();
      } catch (const YAML::Exception&) {
        fail(field(key), n, "expected a list of 3 numbers");
      }
    }
    if (!v.allFinite()) fail(field(key), n, "must be finite");
    return v;
  }

  Eigen::Vector3d unit3(const std::string& key, const Eigen::Vector3d& fallback,
                        bool required = false) {
    const YAML::Node n = node_ ? node_[key] : YAML::Node(YAML::NodeType::Undefined);
    const Eigen::Vector3d v = vec3(key, fallback, required);
    if (!(v.norm() > 1e-12)) fail(field(key), n, "must be a non-zero direction");
    return v.normalized();
  }

  template <typename T>
  T choice(const std::string& key, T fallback,
           const std::vector<std::pair<std::string, T>>& options) {
    const YAML::Node n = child(key, false);
    if (!n) return fallback;
    const std::string s = n.IsScalar() ? n.as<std::string>() : "";
    std::string allowed;
    for (const auto& [name, value] : options) {
      if (s == name) return value;
      allowed += (allowed.empty() ? "" : ", ") + name;
    }
    fail(field(key), n, "expected one of " + allowed);
  }

  Section section(const std::string& key) {
    return Section(child(key, false), field(key), origin_);
  }

  void finish() const {
    if (!node_) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(field(key), kv.first, "unknown field");
    }
  }

 private:
  int line_of_section() const { return node_ ? node_.Mark().line + 1 : 0; }

  YAML::Node node_;
  std::string path_;
  const std::string& origin_;
  std::set<std::string> seen_;
};

ContactConfig parse_contact(const YAML::Node& node, std::size_t index, const std::string& origin) {
  Section s(node, "contacts[" + std::to_string(index) + "]", origin);
  ContactConfig c;
  c.name = s.text("name", "c" + std::to_string(index));
  c.kind = s.choice<ContactKind>("type", ContactKind::Intrinsic,
                                 {{"intrinsic", ContactKind::Intrinsic},
                                  {"extrinsic", ContactKind::Extrinsic}});
  c.position = s.vec3("position_m", {}, true);
  c.normal = s.unit3("normal", {}, true);
  c.friction = s.number("friction", 0.5, true, false, true);
  if (c.kind == ContactKind::Intrinsic) {
    c.sigma = s.number("sigma_n", 0.5, true, true);
  } else {
    if (s.has("sigma_n")) s.fail(s.field("sigma_n"), node["sigma_n"], "extrinsic contacts carry no sigma");
    c.sigma = std::numeric_limits<double>::infinity();
  }
  s.finish();
  return c;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(origin, e.mark.line + 1, "<syntax>", e.msg);
  }
  if (!root || !root.IsMap()) throw ScenarioError(origin, 1, "<root>", "expected a mapping");

  ScenarioConfig cfg;
  cfg.source_text = text;
  Section top(root, "", origin);
  cfg.name = top.text("name", "", true);
  cfg.kind = top.choice<ScenarioKind>("kind", ScenarioKind::Grasp,
                                      {{"grasp", ScenarioKind::Grasp}, {"pivot", ScenarioKind::Pivot}});
  {
    const YAML::Node n = top.child("seed", true);
    try {
      cfg.seed = n.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      top.fail("seed", n, "expected a non-negative integer");
    }
  }
  cfg.repetitions = top.integer("repetitions", 1, 1);
  cfg.estimation_lambda = top.number("estimation_lambda", 1.0, false, false, true);
  cfg.convergence_threshold = top.number("convergence_threshold_n", 0.15, false, true);
  cfg.success_angle_deg = top.number("success_angle_deg", 1.0, false, true);

  {
    Section s = top.section("object");
    if (!top.has("object")) top.fail("object", root, "missing required field");
    cfg.object.geometry = s.choice<ObjectGeometry>(
        "geometry", ObjectGeometry::Box,
        {{"sphere", ObjectGeometry::Sphere}, {"box", ObjectGeometry::Box},
         {"cylinder", ObjectGeometry::Cylinder}, {"tool", ObjectGeometry::Tool}});
    cfg.object.mass = s.number("mass_kg", 0.0, true, true);
    cfg.object.center_of_mass = s.vec3("center_of_mass_m", Eigen::Vector3d::Zero());
    cfg.object.size = s.vec3("size_m", Eigen::Vector3d::Zero());
    s.finish();
  }

  {
    const YAML::Node list = top.child("contacts", true);
    if (!list.IsSequence() || list.size() == 0) top.fail("contacts", list, "expected a non-empty list");
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
      ContactConfig c = parse_contact(list[i], i, origin);
      if (!names.insert(c.name).second) {
        top.fail("contacts[" + std::to_string(i) + "].name", list[i], "duplicate contact name");
      }
      cfg.contacts.push_back(std::move(c));
    }
    if (cfg.intrinsic_count() == 0) top.fail("contacts", list, "at least one intrinsic contact required");
  }

  {
    Section s = top.section("planning");
    cfg.planning.min_force = s.number("min_force_n", 0.2, false, false, true);
    cfg.planning.max_force = s.number("max_force_n", 20.0, false, true);
    cfg.planning.pyramid_sides = s.integer("pyramid_sides", 12, 3);
    cfg.planning.objective = s.choice<PlanObjective>(
        "objective", PlanObjective::MinNormalForce,
        {{"feasibility", PlanObjective::Feasibility},
         {"min_normal_force", PlanObjective::MinNormalForce}});
    cfg.planning.sigma_scale = s.number("sigma_scale", 1.0, false, true);
    s.finish();
  }

  {
    Section s = top.section("plant");
    cfg.plant.contact_stiffness = s.number("contact_stiffness_n_per_m", 5000.0, false, true);
    cfg.plant.finger = s.choice<FingerKind>(
        "finger", FingerKind::Cartesian,
        {{"cartesian", FingerKind::Cartesian}, {"serial4", FingerKind::Serial4}});
    cfg.plant.settle_iterations = s.integer("settle_iterations", 200, 1);
    cfg.plant.settle_tolerance = s.number("settle_tolerance_n", 1e-6, false, true);
    Section t = s.section("tactile");
    cfg.plant.tactile_noise = t.boolean("enabled_errors", true);
    cfg.plant.taxels.uniform = t.boolean("uniform_taxels", false);
    cfg.plant.taxels.error_gain = t.number("error_gain", 1.0, false, false, true);
    cfg.plant.tactile.kernel_width = t.number("kernel_width_m", 0.003, false, true);
    cfg.plant.tactile.hysteresis_time_constant = t.number("hysteresis_time_constant_s", 0.5, false, true);
    cfg.plant.tactile.range_max = t.number("range_max_n", 20.0, false, true);
    t.finish();
    s.finish();
  }

  {
    Section s = top.section("controller");
    const int joints = cfg.plant.finger == FingerKind::Cartesian ? 3 : 4;
    const YAML::Node gain_node = s.child("gain", false);
    if (gain_node) {
      if (gain_node.IsScalar()) {
        const double k = s.number("gain", 50.0, false, true);
        cfg.controller.gain = k * Eigen::MatrixXd::Identity(joints, joints);
      } else if (gain_node.IsSequence() && gain_node.size() == static_cast<std::size_t>(joints)) {
        cfg.controller.gain.resize(joints, joints);
        for (int r = 0; r < joints; ++r) {
          const YAML::Node row = gain_node[static_cast<std::size_t>(r)];
          if (!row.IsSequence() || row.size() != static_cast<std::size_t>(joints)) {
            s.fail("controller.gain", row, "expected " + std::to_string(joints) + " columns");
          }
          for (int c = 0; c < joints; ++c) {
            try {
              cfg.controller.gain(r, c) = row[static_cast<std::size_t>(c)].as<double>();
            } catch (const YAML::Exception&) {
              s.fail("controller.gain", row, "expected numbers");
            }
          }
        }
      } else {
        s.fail("controller.gain", gain_node,
               "expected a number or a " + std::to_string(joints) + "x" + std::to_string(joints) + " matrix");
      }
    } else {
      cfg.controller.gain = 50.0 * Eigen::MatrixXd::Identity(joints, joints);
    }
    cfg.controller.feedback = s.choice<FeedbackSource>(
        "feedback", FeedbackSource::Estimated,
        {{"estimated", FeedbackSource::Estimated}, {"est", FeedbackSource::Estimated},
         {"raw", FeedbackSource::Raw}});
    cfg.controller.deadband = s.number("deadband_n", 0.0, false, false, true);
    cfg.controller.period = 1.0 / s.number("rate_hz", 100.0, false, true);
    try {
      cfg.controller.validate();
    } catch (const std::invalid_argument& e) {
      s.fail("controller.gain", gain_node, e.what());
    }
    s.finish();
  }

  {
    Section s = top.section("trajectory");
    auto& t = cfg.trajectory;
    t.duration = s.number("duration_s", 4.0, false, true);
    t.lift_height = s.number("lift_height_m", 0.0);
    t.lift_start = s.number("lift_start_s", 1.0, false, false, true);
    t.lift_duration = s.number("lift_duration_s", 1.0, false, true);
    t.start_angle_deg = s.number("start_angle_deg", 0.0);
    t.end_angle_deg = s.number("end_angle_deg", t.start_angle_deg);
    t.hold = s.number("hold_s", 1.0, false, false, true);
    t.ramp = s.number("ramp_s", 2.0, false, true);
    t.pivot_axis = s.unit3("pivot_axis", -Eigen::Vector3d::UnitY());
    t.slip_budget = s.number("slip_budget_m", 0.005, false, true);
    t.initial_squeeze = s.number("initial_squeeze_n", 1.0, false, false, true);
    s.finish();
  }

  top.finish();

  if (cfg.kind == ScenarioKind::Pivot) {
    const std::size_t ext = cfg.contacts.size() - cfg.intrinsic_count();
    if (ext != 1) top.fail("contacts", root["contacts"], "a pivot scenario needs exactly one extrinsic contact");
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path, 0, "<file>", "cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

}  // namespace geodex
