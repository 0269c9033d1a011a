#include "geodex/report.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace geodex {

namespace {

using nlohmann::json;

json vec(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json forces(const std::vector<Eigen::Vector3d>& fs) {
  json out = json::array();
  for (const auto& f : fs) out.push_back(vec(f));
  return out;
}

void put(std::ostringstream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, ",%.9g", v);
  out << buf;
}

}  // namespace

std::string report_to_json(const RunReport& r) {
  json doc;
  doc["format"] = kReportFormat;
  doc["scenario"] = r.scenario;
  doc["kind"] = to_string(r.kind);
  doc["feedback"] = to_string(r.feedback);
  doc["seed"] = r.seed;

  json gain = json::array();
  for (Eigen::Index i = 0; i < r.gain.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.gain.cols(); ++j) row.push_back(r.gain(i, j));
    gain.push_back(row);
  }
  doc["controller"] = {{"gain", gain}, {"period_s", r.period}};
  doc["contacts"] = r.contact_names;

  doc["summary"] = {
      {"aborted", r.aborted},
      {"abort_reason", r.abort_reason},
      {"events", r.events},
      {"final_error_n", r.final_error},
      {"converged", r.converged},
      {"max_orientation_change_deg", r.max_orientation_change_deg},
      {"rms_angle_error_deg", r.rms_angle_error_deg},
      {"final_angle_error_deg", r.final_angle_error_deg},
      {"success", r.success},
      {"step_count", r.steps.size()},
      {"wall_seconds", r.wall_seconds},
  };
  doc["config_echo"] = r.config_echo;

  json steps = json::array();
  for (const auto& s : r.steps) {
    const Eigen::Quaterniond& q = s.pose.orientation;
    steps.push_back({
        {"t_s", s.time},
        {"settled", s.settled},
        {"residual", s.residual},
        {"error_n", s.error},
        {"angle_deg", s.angle_deg},
        {"target_angle_deg", s.target_angle_deg},
        {"position_m", vec(s.pose.position)},
        {"orientation_wxyz", json::array({q.w(), q.x(), q.y(), q.z()})},
        {"desired_n", forces(s.desired)},
        {"raw_n", forces(s.raw)},
        {"estimated_n", forces(s.estimated)},
        {"true_n", forces(s.truth)},
    });
  }
  doc["steps"] = std::move(steps);
  return doc.dump(1) + "\n";
}

std::string report_to_csv(const RunReport& r) {
  std::ostringstream out;
  out << "t_s,x_m,y_m,z_m,qw,qx,qy,qz,angle_deg,target_angle_deg,error_n,settled";
  for (const char* group : {"desired", "raw", "estimated", "true"}) {
    for (const auto& name : r.contact_names) {
      for (const char* axis : {"x", "y", "z"}) out << ',' << group << '_' << name << '_' << axis;
    }
  }
  out << '\n';
  for (const auto& s : r.steps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", s.time);
    out << buf;
    for (int k = 0; k < 3; ++k) put(out, s.pose.position(k));
    const Eigen::Quaterniond& q = s.pose.orientation;
    for (double v : {q.w(), q.x(), q.y(), q.z(), s.angle_deg, s.target_angle_deg, s.error}) put(out, v);
    out << ',' << (s.settled ? 1 : 0);
    for (const auto* group : {&s.desired, &s.raw, &s.estimated, &s.truth}) {
      for (const auto& f : *group) {
        for (int k = 0; k < 3; ++k) put(out, f(k));
      }
    }
    out << '\n';
  }
  return out.str();
}

namespace {

class Checker {
 public:
  explicit Checker(std::vector<std::string>& problems) : problems_(problems) {}

  bool field(const json& obj, const std::string& key, json::value_t type, const std::string& where) {
    if (!obj.contains(key)) {
      problems_.push_back(where + key + ": missing");
      return false;
    }
    const json& v = obj.at(key);
    const bool ok = type == json::value_t::number_float ? v.is_number()
                    : type == json::value_t::number_unsigned ? v.is_number_unsigned()
                                                             : v.type() == type;
    if (!ok) problems_.push_back(where + key + ": wrong type");
    return ok;
  }

  void vector3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) {
      problems_.push_back(where + ": expected 3 numbers");
      return;
    }
    for (const auto& x : v) {
      if (!x.is_number()) problems_.push_back(where + ": expected 3 numbers");
    }
  }

 private:
  std::vector<std::string>& problems_;
};

}  // namespace

std::vector<std::string> validate_report(const std::string& json_text) {
  std::vector<std::string> problems;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    problems.push_back(std::string("not JSON: ") + e.what());
    return problems;
  }
  if (!doc.is_object()) return {"document is not an object"};

  using T = json::value_t;
  Checker c(problems);
  if (c.field(doc, "format", T::string, "") && doc["format"] != kReportFormat) {
    problems.push_back("format: expected " + std::string(kReportFormat));
  }
  c.field(doc, "scenario", T::string, "");
  c.field(doc, "config_echo", T::string, "");
  if (c.field(doc, "kind", T::string, "") && doc["kind"] != "grasp" && doc["kind"] != "pivot") {
    problems.push_back("kind: expected grasp or pivot");
  }
  if (c.field(doc, "feedback", T::string, "") && doc["feedback"] != "estimated" &&
      doc["feedback"] != "raw") {
    problems.push_back("feedback: expected estimated or raw");
  }
  c.field(doc, "seed", T::number_unsigned, "");

  if (c.field(doc, "controller", T::object, "")) {
    const json& ctl = doc["controller"];
    c.field(ctl, "period_s", T::number_float, "controller.");
    if (c.field(ctl, "gain", T::array, "controller.")) {
      const std::size_t n = ctl["gain"].size();
      for (const auto& row : ctl["gain"]) {
        if (!row.is_array() || row.size() != n) problems.push_back("controller.gain: not square");
      }
    }
  }

  std::size_t contacts = 0;
  if (c.field(doc, "contacts", T::array, "")) {
    contacts = doc["contacts"].size();
    for (const auto& name : doc["contacts"]) {
      if (!name.is_string()) problems.push_back("contacts: expected names");
    }
  }

  std::size_t step_count = 0;
  if (c.field(doc, "summary", T::object, "")) {
    const json& s = doc["summary"];
    for (const char* key : {"aborted", "converged", "success"}) c.field(s, key, T::boolean, "summary.");
    c.field(s, "abort_reason", T::string, "summary.");
    c.field(s, "events", T::array, "summary.");
    for (const char* key : {"final_error_n", "max_orientation_change_deg", "rms_angle_error_deg",
                            "final_angle_error_deg", "wall_seconds"}) {
      c.field(s, key, T::number_float, "summary.");
    }
    if (c.field(s, "step_count", T::number_unsigned, "summary.")) step_count = s["step_count"];
  }

  if (c.field(doc, "steps", T::array, "")) {
    const json& steps = doc["steps"];
    if (steps.size() != step_count) problems.push_back("steps: count disagrees with summary.step_count");
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const json& s = steps[k];
      const std::string where = "steps[" + std::to_string(k) + "].";
      if (!s.is_object()) {
        problems.push_back(where + ": expected an object");
        continue;
      }
      for (const char* key : {"t_s", "residual", "error_n", "angle_deg", "target_angle_deg"}) {
        c.field(s, key, T::number_float, where);
      }
      c.field(s, "settled", T::boolean, where);
      if (c.field(s, "position_m", T::array, where)) c.vector3(s["position_m"], where + "position_m");
      if (c.field(s, "orientation_wxyz", T::array, where) && s["orientation_wxyz"].size() != 4) {
        problems.push_back(where + "orientation_wxyz: expected 4 numbers");
      }
      for (const char* key : {"desired_n", "raw_n", "estimated_n", "true_n"}) {
        if (!c.field(s, key, T::array, where)) continue;
        if (s[key].size() != contacts) {
          problems.push_back(where + key + ": one force per contact expected");
          continue;
        }
        for (std::size_t i = 0; i < contacts; ++i) {
          c.vector3(s[key][i], where + key + "[" + std::to_string(i) + "]");
        }
      }
      if (problems.size() > 50) break;
    }
  }
  return problems;
}

}  // namespace geodex
