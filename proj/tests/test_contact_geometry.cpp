#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "geodex/contact_geometry.hpp"
#include "scenes.hpp"

using namespace geodex;

TEST_CASE("extend places the normal in its block") {
  Eigen::VectorXd a = extend({1, 0, 0}, 0, 3);
  Eigen::VectorXd expect_a(9);
  expect_a << 1, 0, 0, 0, 0, 0, 0, 0, 0;
  CHECK(a == expect_a);

  Eigen::VectorXd b = extend({0, 0, 1}, 1, 3);
  Eigen::VectorXd expect_b(9);
  expect_b << 0, 0, 0, 0, 0, 1, 0, 0, 0;
  CHECK(b == expect_b);

  const Eigen::Vector3d n = Eigen::Vector3d(1, 2, 2) / 3.0;
  CHECK(extend(n, 0, 1) == Eigen::VectorXd(n));
  CHECK_THROWS_AS(extend(n, 3, 3), std::invalid_argument);
}

TEST_CASE("extend is linear") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Vector3d n1 = scenes::unit_vector(rng), n2 = scenes::unit_vector(rng);
    const double a = 1.7, b = -0.3;
    const Eigen::VectorXd lhs = extend(a * n1 + b * n2, 2, 4);
    const Eigen::VectorXd rhs = a * extend(n1, 2, 4) + b * extend(n2, 2, 4);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("gravity wrench") {
  ObjectModel wrench;
  wrench.mass = 0.3;
  Vector6d g = build_gravity_wrench(wrench);
  CHECK(g(2) == doctest::Approx(-2.943).epsilon(1e-12));
  CHECK(g.tail<3>().isZero());
  CHECK(g(0) == 0.0);

  ObjectModel sphere;
  sphere.mass = 0.082;
  CHECK(build_gravity_wrench(sphere)(2) == doctest::Approx(-0.80442).epsilon(1e-12));

  ObjectModel tiny;
  tiny.mass = 1e-12;
  CHECK(build_gravity_wrench(tiny).norm() < 1e-10);

  ObjectModel bad;
  bad.mass = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("equilibrium matrix on two vertical forces") {
  const double r = 0.05, a = 1.5, b = 0.4;
  ContactSet cs({Contact::intrinsic({r, 0, 0}, {0, 0, 1}, 0.5, 0.1),
                 Contact::intrinsic({-r, 0, 0}, {0, 0, 1}, 0.5, 0.1)});
  ObjectModel obj;
  Eigen::VectorXd f(6);
  f << 0, 0, b, 0, 0, a;  // contact at +r carries b, contact at -r carries a
  const Vector6d w = build_equilibrium_matrix(cs, obj).transpose() * f;
  // (r,0,0) x (0,0,b) = (0,-rb,0); (-r,0,0) x (0,0,a) = (0,ra,0).
  CHECK(w(2) == doctest::Approx(a + b));
  CHECK(w(3) == doctest::Approx(0.0));
  CHECK(w(4) == doctest::Approx(r * (a - b)));
  CHECK(w(5) == doctest::Approx(0.0));
}

TEST_CASE("contact at the center of mass has no moment arm") {
  ObjectModel obj;
  obj.center_of_mass = {0.1, -0.2, 0.3};
  ContactSet cs({Contact::intrinsic(obj.center_of_mass, {1, 0, 0}, 0.5, 0.1)});
  const Eigen::MatrixXd a = build_equilibrium_matrix(cs, obj);
  CHECK(a.rightCols(3).isZero());
}

TEST_CASE("blockwise wrench equals per-contact summation") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    auto scene = scenes::grasp(rng, 1 + t % 5, 0.3);
    scene.object.center_of_mass = scenes::random_vector(rng, 0.02);
    const Eigen::VectorXd f = Eigen::VectorXd::Random(scene.contacts.force_dim()) * 5.0;
    Vector6d sum = Vector6d::Zero();
    for (std::size_t i = 0; i < scene.contacts.size(); ++i) {
      const Eigen::Vector3d fi = f.segment<3>(3 * i);
      const Eigen::Vector3d r = scene.contacts[i].position - scene.object.center_of_mass;
      sum.head<3>() += fi;
      sum(3) += r.y() * fi.z() - r.z() * fi.y();
      sum(4) += r.z() * fi.x() - r.x() * fi.z();
      sum(5) += r.x() * fi.y() - r.y() * fi.x();
    }
    const Vector6d w = build_equilibrium_matrix(scene.contacts, scene.object).transpose() * f;
    CHECK((w - sum).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("contact validation") {
  CHECK_THROWS_AS(ContactSet(std::vector<Contact>{}), std::invalid_argument);
  CHECK_THROWS_AS(ContactSet({Contact::intrinsic({0, 0, 0}, {0, 0, 1.01}, 0.5, 0.1)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ContactSet({Contact::intrinsic({0, 0, 0}, {0, 0, 1}, -0.1, 0.1)}),
                  std::invalid_argument);
  Contact bad = Contact::extrinsic({0, 0, 0}, {0, 0, 1}, 0.5);
  bad.measurement_sigma = 0.3;
  CHECK_THROWS_AS(ContactSet({bad}), std::invalid_argument);
}

TEST_CASE("contact ordering puts intrinsic contacts first, stably") {
  ContactSet cs({Contact::extrinsic({0, 0, 0}, {0, 0, 1}, 0.5, "e0"),
                 Contact::intrinsic({1, 0, 0}, {-1, 0, 0}, 0.5, 0.1, "i0"),
                 Contact::extrinsic({0, 1, 0}, {0, 0, 1}, 0.5, "e1"),
                 Contact::intrinsic({-1, 0, 0}, {1, 0, 0}, 0.5, 0.1, "i1")});
  REQUIRE(cs.size() == 4);
  CHECK(cs[0].name == "i0");
  CHECK(cs[1].name == "i1");
  CHECK(cs[2].name == "e0");
  CHECK(cs[3].name == "e1");
  CHECK(cs.intrinsic_count() == 2);
  CHECK(cs.extrinsic_count() == 2);
  CHECK(cs.force_dim() == 12);
}

TEST_CASE("tangent frame is right handed") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Vector3d n = scenes::unit_vector(rng);
    const auto [t1, t2] = tangent_frame(n);
    CHECK(std::abs(t1.dot(n)) < 1e-12);
    CHECK(std::abs(t2.dot(n)) < 1e-12);
    CHECK(std::abs(t1.norm() - 1.0) < 1e-12);
    CHECK((t1.cross(t2) - n).norm() < 1e-12);
  }
  // Axis-aligned normals seed from the first axis with the smallest component.
  const auto [a, b] = tangent_frame({0, 0, 1});
  CHECK((a - Eigen::Vector3d::UnitX()).norm() < 1e-15);
  CHECK((b - Eigen::Vector3d::UnitY()).norm() < 1e-15);
}

TEST_CASE("friction pyramid basics") {
  const Contact c = Contact::intrinsic({0, 0, 0}, Eigen::Vector3d(1, -2, 2) / 3.0, 0.7, 0.1);
  const Eigen::MatrixXd rows = linearize_friction_cone(c, 12);
  CHECK(rows.rows() == 12);
  CHECK(rows.cols() == 3);
  CHECK(((rows * (4.0 * c.normal)).array() > 0.0).all());
  CHECK(((rows * (-0.5 * c.normal)).array() < 0.0).any());
  CHECK_THROWS_AS(linearize_friction_cone(c, 2), std::invalid_argument);
}

TEST_CASE("pyramid edges lie on the exact cone") {
  const double mu = 0.5;
  const int k = 12;
  const Contact c = Contact::intrinsic({0, 0, 0}, {0, 0, 1}, mu, 0.1);
  const Eigen::MatrixXd rows = linearize_friction_cone(c, k);
  for (int j = 0; j < k; ++j) {
    const double a = 2.0 * std::numbers::pi * (j + 0.5) / k;
    const Eigen::Vector3d edge(mu * std::cos(a), mu * std::sin(a), 1.0);
    const Eigen::VectorXd s = rows * edge;
    CHECK(s.minCoeff() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.minCoeff() > -1e-12);
  }
}

TEST_CASE("inscribed pyramid implies exact cone membership") {
  const double mu = 0.5;
  const Contact c = Contact::intrinsic({0, 0, 0}, {0, 0, 1}, mu, 0.1);
  const Eigen::MatrixXd rows = linearize_friction_cone(c, 12);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> tangential(-0.6, 0.6);
  std::uniform_real_distribution<double> normal(-0.2, 1.0);
  int accepted = 0, violations = 0;
  while (accepted < 10000) {
    const Eigen::Vector3d f(tangential(rng), tangential(rng), normal(rng));
    if ((rows * f).minCoeff() < 0.0) continue;
    ++accepted;
    if (std::hypot(f.x(), f.y()) > mu * f.z() + 1e-12) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("constraint set row counts and min-force boundary") {
  ContactSet one({Contact::intrinsic({0, 0, 0}, {0, 0, 1}, 0.5, 0.1)});
  const ConstraintSet a = build_constraint_set(one, 1.0);
  CHECK(a.rows() == 13);
  const Eigen::VectorXd f = Eigen::Vector3d(0, 0, 1.0);
  CHECK(a.contains(f));
  CHECK(a.min_slack(f) == doctest::Approx(0.0));

  ContactSet three({Contact::intrinsic({0.1, 0, 0}, {-1, 0, 0}, 0.5, 0.1),
                    Contact::extrinsic({0, 0, -0.1}, {0, 0, 1}, 0.5),
                    Contact::intrinsic({-0.1, 0, 0}, {1, 0, 0}, 0.5, 0.1)});
  const ConstraintSet b = build_constraint_set(three, 0.5);
  CHECK(b.rows() == 38);
  CHECK(b.matrix.cols() == 9);
  CHECK(b.offsets.head(36).isZero());
  CHECK(b.offsets.tail(2) == Eigen::Vector2d(0.5, 0.5));
  CHECK_THROWS_AS(build_constraint_set(three, -1.0), std::invalid_argument);

  const ConstraintSet capped = append_max_force_rows(b, three, 20.0);
  CHECK(capped.rows() == 40);
  CHECK(append_max_force_rows(b, three, INFINITY).rows() == 38);
}

TEST_CASE("constraint set feasible region is convex") {
  std::mt19937_64 rng(5);
  auto scene = scenes::grasp(rng, 3, 0.2);
  const ConstraintSet cs = build_constraint_set(scene.contacts, 0.5);
  std::vector<Eigen::VectorXd> feasible;
  while (feasible.size() < 200) {
    Eigen::VectorXd f(9);
    for (int i = 0; i < 3; ++i) {
      f.segment<3>(3 * i) = 2.0 * scene.contacts[i].normal + 1.2 * scenes::random_vector(rng, 1.0);
    }
    if (cs.contains(f)) feasible.push_back(f);
  }
  std::uniform_real_distribution<double> theta(0.0, 1.0);
  for (std::size_t i = 0; i + 1 < feasible.size(); ++i) {
    const double t = theta(rng);
    CHECK(cs.contains(t * feasible[i] + (1 - t) * feasible[i + 1], 1e-12));
  }
}
