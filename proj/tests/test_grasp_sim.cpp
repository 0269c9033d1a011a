#include <cmath>
#include <random>

#include "doctest.h"
#include "geodex/grasp_sim.hpp"

using namespace geodex;

namespace {

constexpr double kStiffness = 5000.0;

PlantModel weightless_model(int fingers) {
  PlantModel m;
  m.mass = 0.1;
  m.gravity.setZero();
  m.contact_stiffness = kStiffness;
  for (int i = 0; i < fingers; ++i) m.fingers.push_back(FingerModel::cartesian(Eigen::Vector3d::Zero()));
  return m;
}

SimContact finger_contact(const Eigen::Vector3d& point, const Eigen::Vector3d& inward_normal,
                          double depth, double mu = 0.8) {
  SimContact c;
  c.name = "finger";
  c.body_point = point;
  c.normal = inward_normal;
  c.anchor = point + depth * inward_normal;
  c.friction = mu;
  return c;
}

// Two fingers on the x axis, each pressed `depth` into a 2 cm wide body.
PlantState pinch_state(double depth) {
  PlantState s;
  s.contacts.push_back(finger_contact({-0.01, 0, 0}, Eigen::Vector3d::UnitX(), depth));
  s.contacts.push_back(finger_contact({0.01, 0, 0}, -Eigen::Vector3d::UnitX(), depth));
  for (const auto& c : s.contacts) s.q.push_back(c.anchor);
  return s;
}

std::vector<Eigen::VectorXd> hold(const PlantState& s) { return s.q; }

ScenarioConfig bundle(const std::string& name) {
  return load_scenario(std::string(GEODEX_SCENARIO_DIR) + "/" + name + ".scenario");
}

}  // namespace

TEST_CASE("admittance step of a zero error is zero") {
  const Eigen::MatrixXd j = Eigen::MatrixXd::Random(3, 4);
  const Eigen::MatrixXd k = 30.0 * Eigen::MatrixXd::Identity(4, 4);
  CHECK(admittance_step(Eigen::Vector3d::Zero(), j, k).norm() == 0.0);
}

TEST_CASE("admittance step with identity jacobian and scalar gain is e over k") {
  const Eigen::Vector3d e(0.3, -1.2, 0.5);
  const Eigen::VectorXd dq = admittance_step(e, Eigen::Matrix3d::Identity(), 50.0 * Eigen::Matrix3d::Identity());
  CHECK((dq - e / 50.0).norm() < 1e-15);
}

TEST_CASE("admittance step matches an explicit inverse") {
  std::mt19937 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(4, 4), j(3, 4);
    for (auto* m : {&a, &j})
      for (Eigen::Index r = 0; r < m->rows(); ++r)
        for (Eigen::Index c = 0; c < m->cols(); ++c) (*m)(r, c) = g(rng);
    const Eigen::MatrixXd k = a * a.transpose() + 4.0 * Eigen::MatrixXd::Identity(4, 4);
    const Eigen::Vector3d e(g(rng), g(rng), g(rng));
    const Eigen::VectorXd expected = k.inverse() * j.transpose() * e;
    CHECK((admittance_step(e, j, k) - expected).norm() <= 1e-10 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("admittance step rejects a gain that is not positive-definite") {
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  k(2, 2) = -1.0;
  CHECK_THROWS_AS(admittance_step(Eigen::Vector3d::Ones(), Eigen::Matrix3d::Identity(), k),
                  std::invalid_argument);
}

TEST_CASE("a box resting on four corners sinks by mg over 4k and stays level") {
  PlantModel model;
  model.mass = 0.4;
  model.contact_stiffness = kStiffness;
  PlantState s;
  for (double x : {-0.05, 0.05}) {
    for (double y : {-0.03, 0.03}) {
      SimContact c;
      c.kind = ContactKind::Extrinsic;
      c.body_point = Eigen::Vector3d(x, y, 0.0);
      c.normal = Eigen::Vector3d::UnitZ();
      c.anchor = c.body_point;
      c.friction = 0.5;
      s.contacts.push_back(c);
    }
  }
  s.pose.position.z() = -1e-6;
  settle(model, s);
  CHECK(s.settled);
  CHECK(s.residual <= 1e-6);
  const double weight = model.mass * 9.81;
  CHECK(s.pose.position.z() == doctest::Approx(-weight / (4.0 * kStiffness)).epsilon(1e-6));
  CHECK(s.pose.position.head<2>().norm() < 1e-9);
  CHECK(Eigen::AngleAxisd(s.pose.orientation).angle() < 1e-9);
  Eigen::Vector3d total = Eigen::Vector3d::Zero();
  for (const auto& c : s.contacts) {
    total += c.force;
    CHECK(c.force.z() == doctest::Approx(weight / 4.0).epsilon(1e-6));
  }
  CHECK(total.z() == doctest::Approx(weight).epsilon(1e-9));
  CHECK(total.head<2>().norm() < 1e-6);
}

TEST_CASE("symmetric pinch carries equal and opposite forces") {
  const PlantModel model = weightless_model(2);
  PlantState s = pinch_state(0.001);
  settle(model, s);
  CHECK(s.residual <= 1e-6);
  CHECK((s.contacts[0].force + s.contacts[1].force).norm() < 1e-6);
  CHECK(s.contacts[0].force.x() == doctest::Approx(kStiffness * 0.001).epsilon(1e-6));
}

TEST_CASE("pinch under gravity shares the weight equally") {
  PlantModel model = weightless_model(2);
  model.gravity = Eigen::Vector3d(0, 0, -9.81);
  PlantState s = pinch_state(0.001);
  settle(model, s);
  CHECK(s.settled);
  const double half = 0.5 * model.mass * 9.81;
  CHECK(s.contacts[0].force.z() == doctest::Approx(half).epsilon(1e-6));
  CHECK(s.contacts[1].force.z() == doctest::Approx(half).epsilon(1e-6));
  CHECK(s.pose.position.z() == doctest::Approx(-model.mass * 9.81 / (2.0 * kStiffness)).epsilon(1e-6));
}

TEST_CASE("pushing one finger moves the object half way, as two springs in series") {
  const PlantModel model = weightless_model(2);
  const double depth = 0.001, push = 0.0004;
  PlantState s = pinch_state(depth);
  settle(model, s);
  std::vector<Eigen::VectorXd> q = hold(s);
  q[0].x() += push;
  const PlantState next = plant_step(model, s, q, 0.01);
  CHECK(next.pose.position.x() == doctest::Approx(push / 2.0).epsilon(1e-6));
  CHECK(next.contacts[0].force.x() == doctest::Approx(kStiffness * (depth + push / 2.0)).epsilon(1e-6));
  CHECK(next.contacts[1].force.x() == doctest::Approx(-kStiffness * (depth + push / 2.0)).epsilon(1e-6));
}

TEST_CASE("a held grasp does not drift") {
  PlantModel model = weightless_model(2);
  model.gravity = Eigen::Vector3d(0, 0, -9.81);
  PlantState s = pinch_state(0.001);
  settle(model, s);
  const Pose start = s.pose;
  const auto q = hold(s);
  for (int k = 0; k < 1000; ++k) {
    s = plant_step(model, s, q, 0.01);
    CHECK(s.residual <= 1e-6);
  }
  CHECK((s.pose.position - start.position).norm() < 1e-9);
  CHECK(s.pose.orientation.angularDistance(start.orientation) < 1e-9);
  CHECK(s.slip_events == 0);
}

TEST_CASE("one admittance step shrinks a pinch force error by the series-spring factor") {
  const PlantModel model = weightless_model(2);
  const double k = 200.0, dt = 0.01;
  REQUIRE(k > kStiffness * dt);
  PlantState s = pinch_state(0.001);
  settle(model, s);
  const Eigen::Vector3d desired(8.0, 0.0, 0.0);
  const Eigen::Vector3d e0 = desired - s.contacts[0].force;
  std::vector<Eigen::VectorXd> q = hold(s);
  q[0] += dt * admittance_step(e0, Eigen::Matrix3d::Identity(), k * Eigen::Matrix3d::Identity());
  const PlantState next = plant_step(model, s, q, dt);
  const Eigen::Vector3d e1 = desired - next.contacts[0].force;
  CHECK(e1.norm() < e0.norm());
  CHECK(e1.x() == doctest::Approx(e0.x() * (1.0 - kStiffness * dt / (2.0 * k))).epsilon(1e-6));
}

TEST_CASE("noise-free estimated feedback tracks the plan") {
  ScenarioConfig cfg = bundle("wrench3");
  cfg.plant.tactile_noise = false;
  const RunReport r = run_grasp_scenario(cfg);
  REQUIRE_FALSE(r.aborted);
  double mean = 0.0;
  for (const auto& st : r.steps) {
    mean += st.error;
    CHECK(st.residual <= 1e-6);
  }
  mean /= static_cast<double>(r.steps.size());
  CHECK(mean <= 0.01);
}

TEST_CASE("pivot with equal start and end angles holds still") {
  ScenarioConfig cfg = bundle("cube_pivot");
  cfg.trajectory.end_angle_deg = cfg.trajectory.start_angle_deg;
  const RunReport r = run_pivot_scenario(cfg);
  CHECK_FALSE(r.aborted);
  CHECK(r.events.empty());
  CHECK(r.rms_angle_error_deg < 0.1);
}

TEST_CASE("identical configs give identical runs") {
  ScenarioConfig cfg = bundle("sphere_pinch");
  const RunReport a = run_scenario(cfg);
  const RunReport b = run_scenario(cfg);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    CHECK(a.steps[k].error == b.steps[k].error);
    CHECK(a.steps[k].pose.position == b.steps[k].pose.position);
  }
  CHECK(a.final_error == b.final_error);
}

TEST_CASE("runners refuse the wrong scenario kind") {
  CHECK_THROWS(run_pivot_scenario(bundle("sphere_pinch")));
  CHECK_THROWS(run_grasp_scenario(bundle("cube_pivot")));
}
