#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>

#include "geodex/fe_subspace.hpp"
#include "geodex/force_estimation.hpp"
#include "geodex/force_planning.hpp"
#include "geodex/grasp_sim.hpp"
#include "geodex/tactile_model.hpp"

namespace geodex {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

struct PlanResult {
  std::optional<ForcePlan> plan;
  std::string failure;
};

struct Setup {
  PlantModel model;
  PlantState state;
  std::vector<double> sigmas;
  std::vector<Fingertip> tips;
  std::vector<Eigen::Matrix3d> tip_frames;
  std::vector<Eigen::Vector3d> finger_bases;
  Eigen::Vector3d pivot_world = Eigen::Vector3d::Zero();
  Eigen::Vector3d finger_center_body = Eigen::Vector3d::Zero();
  Eigen::Vector3d pivot_body = Eigen::Vector3d::Zero();
};

std::size_t finger_count(const PlantState& s) {
  return static_cast<std::size_t>(std::count_if(s.contacts.begin(), s.contacts.end(),
                                                [](const SimContact& c) { return !c.environment(); }));
}

PlanResult plan_at(const ScenarioConfig& cfg, const Setup& su, const PlantState& state) {
  PlanResult out;
  try {
    const ContactSet cs = current_contacts(state, su.sigmas);
    const FEPlane plane = compute_fe_plane(cs, current_object(su.model, state));
    const ConstraintSet c = append_max_force_rows(
        build_constraint_set(cs, cfg.planning.min_force, cfg.planning.pyramid_sides), cs,
        cfg.planning.max_force);
    const UncertaintyModel u = build_uncertainty(plane, cs);
    ForcePlan p = cs.extrinsic_count() > 0
                      ? plan_extrinsic_forces(plane, c, cs, u)
                      : plan_grasp_forces(plane, c, cs, u, cfg.planning.objective);
    if (!p.feasible) {
      out.failure = "force plan infeasible";
      return out;
    }
    out.plan = std::move(p);
  } catch (const NoEquilibriumError& e) {
    out.failure = std::string("no force equilibrium: ") + e.what();
  }
  return out;
}

Eigen::Quaterniond pivot_rotation(const ScenarioConfig& cfg, double angle_deg) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle_deg / kDeg, cfg.trajectory.pivot_axis));
}

double target_angle(const ScenarioConfig& cfg, double t) {
  const auto& tr = cfg.trajectory;
  const double s = std::clamp((t - tr.hold) / tr.ramp, 0.0, 1.0);
  return tr.start_angle_deg + (tr.end_angle_deg - tr.start_angle_deg) * s;
}

double measured_angle(const ScenarioConfig& cfg, const Pose& pose) {
  const Eigen::Quaterniond& q = pose.orientation;
  return 2.0 * std::atan2(q.vec().dot(cfg.trajectory.pivot_axis), q.w()) * kDeg;
}

Eigen::Vector3d hand_offset(const ScenarioConfig& cfg, const Setup& su, double t) {
  const auto& tr = cfg.trajectory;
  if (cfg.kind == ScenarioKind::Pivot) {
    const Eigen::Vector3d arm = su.finger_center_body - su.pivot_body;
    return pivot_rotation(cfg, target_angle(cfg, t)) * arm -
           pivot_rotation(cfg, tr.start_angle_deg) * arm;
  }
  if (tr.lift_height == 0.0) return Eigen::Vector3d::Zero();
  const double s = std::clamp((t - tr.lift_start) / tr.lift_duration, 0.0, 1.0);
  return Eigen::Vector3d(0.0, 0.0, tr.lift_height * s);
}

// Object, contacts and initial pose; fingers come later.
Setup skeleton(const ScenarioConfig& cfg) {
  Setup su;
  su.model.mass = cfg.object.mass;
  su.model.center_of_mass = cfg.object.center_of_mass;
  su.model.contact_stiffness = cfg.plant.contact_stiffness;
  su.model.settle_iterations = cfg.plant.settle_iterations;
  su.model.settle_tolerance = cfg.plant.settle_tolerance;

  std::vector<ContactConfig> ordered = cfg.contacts;
  std::stable_partition(ordered.begin(), ordered.end(),
                        [](const ContactConfig& c) { return c.kind == ContactKind::Intrinsic; });
  std::size_t fingers = 0;
  for (const auto& c : ordered) {
    SimContact s;
    s.name = c.name;
    s.kind = c.kind;
    s.body_point = c.position;
    s.normal = c.normal;
    s.friction = c.friction;
    su.state.contacts.push_back(s);
    if (c.kind == ContactKind::Intrinsic) {
      su.sigmas.push_back(c.sigma * cfg.planning.sigma_scale);
      su.finger_center_body += c.position;
      ++fingers;
    } else {
      su.pivot_body = c.position;
    }
  }
  su.finger_center_body /= static_cast<double>(fingers);

  if (cfg.kind == ScenarioKind::Pivot) {
    su.state.pose.orientation = pivot_rotation(cfg, cfg.trajectory.start_angle_deg);
    su.state.pose.position = su.pivot_world - su.state.pose.orientation * su.pivot_body;
  }
  return su;
}

// Builds the plant at the first planned forces plus an internal squeeze.
std::optional<Setup> build_setup(const ScenarioConfig& cfg, RunReport& report) {
  Setup su = skeleton(cfg);
  const std::size_t fingers = su.sigmas.size();
  for (const auto& c : su.state.contacts) report.contact_names.push_back(c.name);

  const PlanResult first = plan_at(cfg, su, su.state);
  if (!first.plan) {
    report.aborted = true;
    report.abort_reason = first.failure + " at the initial configuration";
    return std::nullopt;
  }

  // Starting forces: the plan plus an internal squeeze, shrunk until it is
  // inside the linearized cones.
  const ContactSet cs = current_contacts(su.state, su.sigmas);
  const FEPlane plane = compute_fe_plane(cs, current_object(su.model, su.state));
  const ConstraintSet rows = build_constraint_set(cs, cfg.planning.min_force, cfg.planning.pyramid_sides);
  Eigen::VectorXd squeeze = Eigen::VectorXd::Zero(cs.force_dim());
  for (std::size_t i = 0; i < cs.intrinsic_count(); ++i) squeeze += extend(cs[i].normal, i, cs.size());
  squeeze = plane.basis.transpose() * (plane.basis * squeeze);
  Eigen::VectorXd f_init = first.plan->forces;
  if (squeeze.norm() > 1e-9 && cfg.trajectory.initial_squeeze > 0.0) {
    double s = cfg.trajectory.initial_squeeze;
    for (int tries = 0; tries < 20; ++tries, s *= 0.5) {
      const Eigen::VectorXd candidate = first.plan->forces + s * squeeze.normalized();
      if (rows.min_slack(candidate) >= 0.0) {
        f_init = candidate;
        break;
      }
    }
  }

  const double k = cfg.plant.contact_stiffness;
  for (std::size_t i = 0; i < su.state.contacts.size(); ++i) {
    auto& c = su.state.contacts[i];
    c.anchor = su.state.pose.apply(c.body_point) + f_init.segment<3>(3 * static_cast<Eigen::Index>(i)) / k;
  }

  for (std::size_t i = 0; i < fingers; ++i) {
    const Eigen::Vector3d tip = su.state.contacts[i].anchor;
    const Eigen::Vector3d n = world_normal(su.state.contacts[i], su.state.pose);
    const auto [t1, t2] = tangent_frame(n);
    Eigen::Matrix3d frame;
    frame << t1, t2, n;
    if (cfg.plant.finger == FingerKind::Cartesian) {
      su.model.fingers.push_back(FingerModel::cartesian(tip));
      su.state.q.push_back(Eigen::VectorXd::Zero(3));
    } else {
      Eigen::Matrix3d chain;
      chain << n, t1, t2;
      FingerModel f = FingerModel::serial4(Eigen::Vector3d::Zero(), chain);
      const Eigen::Vector4d q_nominal(0.0, 0.3, 0.4, 0.3);
      f.set_base(tip - f.forward(q_nominal));
      su.model.fingers.push_back(f);
      su.state.q.push_back(q_nominal);
    }
    su.finger_bases.push_back(su.model.fingers.back().base());
    su.tip_frames.push_back(frame);

    std::vector<TaxelSpec> layout = generate_hemisphere_layout();
    if (cfg.plant.tactile_noise) layout = characterize_layout(layout, cfg.plant.taxels, cfg.seed, i);
    su.tips.emplace_back(layout, cfg.plant.tactile, cfg.seed, i);
  }
  settle(su.model, su.state);
  return su;
}

// Orthonormal basis (in FE-coordinates) of the directions an estimate can
// move along: the span of the plane-projected contact normals.
Eigen::MatrixXd measurable_basis(const FEPlane& plane, const ContactSet& cs) {
  const Eigen::MatrixXd e_hat = plane.basis * measurement_cone_matrix(cs);
  if (e_hat.rows() == 0) return e_hat;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(e_hat, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > kRankTolerance * sv(0)) ++rank;
  return svd.matrixU().leftCols(rank);
}

void add_event(RunReport& report, const std::string& what, double t) {
  char buf[48];
  std::snprintf(buf, sizeof buf, " at t=%.2f s", t);
  report.events.push_back(what + buf);
}

RunReport run(const ScenarioConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  cfg.controller.validate();
  RunReport report;
  report.scenario = cfg.name;
  report.kind = cfg.kind;
  report.feedback = cfg.controller.feedback;
  report.seed = cfg.seed;
  report.gain = cfg.controller.gain;
  report.period = cfg.controller.period;
  report.config_echo = cfg.source_text;

  std::optional<Setup> setup = build_setup(cfg, report);
  if (!setup) {
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
  }
  Setup& su = *setup;
  PlantState& state = su.state;
  const std::size_t fingers = finger_count(state);
  const double dt = cfg.controller.period;
  const int steps = std::max(1, static_cast<int>(std::lround(cfg.trajectory.duration / dt)));
  const Eigen::Quaterniond start_orientation = state.pose.orientation;
  std::vector<Eigen::VectorXd> q_des = state.q;
  bool lost_fingers = false, lost_environment = false, slipped = false;

  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const PlanResult planned = plan_at(cfg, su, state);
    if (!planned.plan) {
      report.aborted = true;
      report.abort_reason = planned.failure;
      add_event(report, planned.failure, t);
      break;
    }
    const ContactSet cs = current_contacts(state, su.sigmas);
    const FEPlane plane = compute_fe_plane(cs, current_object(su.model, state));

    Eigen::VectorXd readings(static_cast<Eigen::Index>(fingers));
    for (std::size_t i = 0; i < fingers; ++i) {
      const SimContact& c = state.contacts[i];
      const Eigen::Matrix3d& frame = su.tip_frames[i];
      FingertipReading r;
      if (c.active) {
        const Eigen::Vector3d point = 0.012 * (frame.transpose() * world_normal(c, state.pose));
        r = su.tips[i].sense(point, frame.transpose() * c.force, dt);
      } else {
        r = su.tips[i].release(dt);
      }
      readings(static_cast<Eigen::Index>(i)) = r.in_contact ? r.force_magnitude : 0.0;
    }
    const MeasurementVector measured(cs, readings);
    const Eigen::VectorXd estimated =
        cs.extrinsic_count() > 0
            ? estimate_extrinsic_forces(plane, cs, measured, cfg.estimation_lambda).forces
            : estimate_grasp_forces(plane, cs, measured);
    const bool use_estimate = cfg.controller.feedback == FeedbackSource::Estimated;
    const Eigen::VectorXd& feedback = use_estimate ? estimated : measured.force();
    Eigen::VectorXd error = planned.plan->forces - feedback;
    if (use_estimate) {
      // Components outside the measurable span never change with the
      // readings; integrating them would only wind the fingers up.
      const Eigen::MatrixXd u = measurable_basis(plane, cs);
      error = plane.basis.transpose() * (u * (u.transpose() * (plane.basis * error)));
    }

    StepRecord rec;
    rec.time = t;
    rec.pose = state.pose;
    rec.settled = state.settled;
    rec.residual = state.residual;
    double error_sum = 0.0;
    for (std::size_t i = 0; i < state.contacts.size(); ++i) {
      const auto seg = 3 * static_cast<Eigen::Index>(i);
      rec.desired.push_back(planned.plan->forces.segment<3>(seg));
      rec.raw.push_back(measured.force().segment<3>(seg));
      rec.estimated.push_back(estimated.segment<3>(seg));
      rec.truth.push_back(state.contacts[i].force);
      if (i >= fingers) continue;
      Eigen::Vector3d e = error.segment<3>(seg);
      error_sum += e.norm();
      if (e.norm() < cfg.controller.deadband) e.setZero();
      const Eigen::MatrixXd j = su.model.fingers[i].jacobian(state.q[i]);
      q_des[i] += dt * admittance_step(e, j, cfg.controller.gain);
    }
    rec.error = error_sum / static_cast<double>(fingers);
    if (cfg.kind == ScenarioKind::Pivot) {
      rec.angle_deg = measured_angle(cfg, state.pose);
      rec.target_angle_deg = target_angle(cfg, t);
    }
    report.max_orientation_change_deg =
        std::max(report.max_orientation_change_deg,
                 start_orientation.angularDistance(state.pose.orientation) * kDeg);
    report.steps.push_back(std::move(rec));

    state.hand_offset = hand_offset(cfg, su, t + dt);
    state = plant_step(su.model, state, q_des, dt);

    bool any_finger = false;
    for (std::size_t i = 0; i < fingers; ++i) any_finger = any_finger || state.contacts[i].active;
    if (!any_finger && !lost_fingers) {
      lost_fingers = true;
      add_event(report, "all finger contacts lost", t + dt);
    }
    for (std::size_t i = fingers; i < state.contacts.size(); ++i) {
      const auto& c = state.contacts[i];
      if (!c.active && !lost_environment) {
        lost_environment = true;
        add_event(report, "environment contact '" + c.name + "' lost", t + dt);
      }
      if (c.slip_distance > cfg.trajectory.slip_budget && !slipped) {
        slipped = true;
        add_event(report, "environment contact '" + c.name + "' slipped beyond budget", t + dt);
      }
    }
  }

  const std::size_t n = report.steps.size();
  if (n > 0) {
    const std::size_t tail = std::max<std::size_t>(1, n / 4);
    double sum = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) sum += report.steps[i].error;
    report.final_error = sum / static_cast<double>(tail);
  }
  report.converged = !report.aborted && n > 0 && report.final_error <= cfg.convergence_threshold;

  if (cfg.kind == ScenarioKind::Pivot && n > 0) {
    double sq = 0.0;
    int count = 0;
    for (const auto& s : report.steps) {
      if (s.time < cfg.trajectory.hold) continue;
      sq += std::pow(s.angle_deg - s.target_angle_deg, 2);
      ++count;
    }
    report.rms_angle_error_deg = count > 0 ? std::sqrt(sq / count) : 0.0;
    report.final_angle_error_deg =
        std::abs(measured_angle(cfg, state.pose) - cfg.trajectory.end_angle_deg);
    report.success = !report.aborted && report.events.empty();
  } else {
    report.success = !report.aborted && !lost_fingers &&
                     report.max_orientation_change_deg <= cfg.success_angle_deg;
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace

RunReport run_grasp_scenario(const ScenarioConfig& config) {
  if (config.kind != ScenarioKind::Grasp) throw std::invalid_argument("not a grasp scenario");
  return run(config);
}

RunReport run_pivot_scenario(const ScenarioConfig& config) {
  if (config.kind != ScenarioKind::Pivot) throw std::invalid_argument("not a pivot scenario");
  return run(config);
}

RunReport run_scenario(const ScenarioConfig& config) { return run(config); }

ScenarioPlan plan_scenario(const ScenarioConfig& config) {
  const Setup su = skeleton(config);
  ScenarioPlan out;
  out.contacts = current_contacts(su.state, su.sigmas);
  out.object = current_object(su.model, su.state);
  PlanResult r = plan_at(config, su, su.state);
  out.plan = std::move(r.plan);
  out.failure = std::move(r.failure);
  return out;
}

}  // namespace geodex
