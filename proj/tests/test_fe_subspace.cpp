#include <random>

#include "doctest.h"
#include "geodex/fe_subspace.hpp"
#include "scenes.hpp"

using namespace geodex;

namespace {

// Rank by Gaussian elimination with partial pivoting, independent of the SVD.
int echelon_rank(Eigen::MatrixXd a, double tol) {
  int rank = 0;
  for (Eigen::Index col = 0; col < a.cols() && rank < a.rows(); ++col) {
    Eigen::Index pivot = rank;
    for (Eigen::Index r = rank; r < a.rows(); ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (std::abs(a(pivot, col)) <= tol) continue;
    a.row(pivot).swap(a.row(rank));
    for (Eigen::Index r = rank + 1; r < a.rows(); ++r) {
      a.row(r) -= a(r, col) / a(rank, col) * a.row(rank);
    }
    ++rank;
  }
  return rank;
}

Eigen::VectorXd random_on_plane(const FEPlane& p, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 3.0);
  Eigen::VectorXd x(p.dimension);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
  return p.basis.transpose() * x + p.particular;
}

}  // namespace

TEST_CASE("plane invariants on random scenes") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 40; ++t) {
    auto s = scenes::grasp(rng, 2 + t % 4, 0.3);
    const FEPlane p = compute_fe_plane(s.contacts, s.object);
    const Eigen::MatrixXd gram = p.basis * p.basis.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(p.dimension, p.dimension)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((p.a_fe.transpose() * p.particular + p.gravity_wrench).norm() <= 1e-9);
    CHECK((p.a_fe.transpose() * p.basis.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("plane dimension for generic contact counts") {
  ContactSet three({Contact::intrinsic({0.03, 0, 0}, {-1, 0, 0}, 0.8, 0.1),
                    Contact::intrinsic({-0.02, 0.02, 0.01}, Eigen::Vector3d(1, -1, 0).normalized(), 0.8, 0.1),
                    Contact::intrinsic({-0.02, -0.02, -0.01}, Eigen::Vector3d(1, 1, 0).normalized(), 0.8, 0.1)});
  ObjectModel obj;
  obj.mass = 0.3;
  CHECK(compute_fe_plane(three, obj).dimension == 3);

  ContactSet two({Contact::intrinsic({0.03, 0.01, 0}, {-1, 0, 0}, 0.8, 0.1),
                  Contact::intrinsic({-0.03, -0.01, 0}, {1, 0, 0}, 0.8, 0.1)});
  ObjectModel weightless;
  weightless.gravity_acceleration.setZero();
  CHECK(compute_fe_plane(two, weightless).dimension == 1);
}

TEST_CASE("dimension matches an independent rank count") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    auto s = scenes::grasp(rng, 1 + t % 5, 0.3);
    s.object.gravity_acceleration.setZero();
    const FEPlane p = compute_fe_plane(s.contacts, s.object);
    const int rank = echelon_rank(p.a_fe.transpose(), 1e-9);
    CHECK(p.dimension == s.contacts.force_dim() - rank);
  }
}

TEST_CASE("coordinate maps") {
  std::mt19937_64 rng(3);
  auto s = scenes::grasp(rng, 3, 0.3);
  const FEPlane p = compute_fe_plane(s.contacts, s.object);

  CHECK(to_fe_coords(p, p.particular).norm() <= 1e-12);
  const Eigen::VectorXd e1 = to_fe_coords(p, p.particular + p.basis.row(0).transpose());
  CHECK((e1 - Eigen::VectorXd::Unit(p.dimension, 0)).norm() <= 1e-12);
  CHECK((from_fe_coords(p, Eigen::VectorXd::Zero(p.dimension)) - p.particular).norm() == 0.0);

  for (int t = 0; t < 1000; ++t) {
    const Eigen::VectorXd f = random_on_plane(p, rng);
    CHECK((from_fe_coords(p, to_fe_coords(p, f)) - f).norm() <= 1e-9);
    const Eigen::VectorXd x1 = Eigen::VectorXd::Random(p.dimension) * 10.0;
    const Eigen::VectorXd x2 = Eigen::VectorXd::Random(p.dimension) * 10.0;
    const Eigen::VectorXd out = from_fe_coords(p, x1);
    CHECK(p.equilibrium_residual(out) <= 1e-9);
    CHECK((from_fe_coords(p, x1 + x2) - (out + from_fe_coords(p, x2) - p.particular)).norm() <= 1e-12);
  }

  CHECK_THROWS_AS(to_fe_coords(p, Eigen::VectorXd::Zero(4)), std::invalid_argument);
  CHECK_THROWS_AS(from_fe_coords(p, Eigen::VectorXd::Zero(p.dimension + 1)), std::invalid_argument);
}

TEST_CASE("moves along the basis preserve equilibrium") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    auto s = scenes::grasp(rng, 3 + t % 3, 0.3);
    const FEPlane p = compute_fe_plane(s.contacts, s.object);
    const Eigen::VectorXd f = random_on_plane(p, rng);
    const Eigen::VectorXd df = p.basis.transpose() * Eigen::VectorXd::Random(p.dimension) * 20.0;
    CHECK(p.equilibrium_residual(f + df) <= 1e-9);
  }
}

TEST_CASE("projection is idempotent and contracts distances") {
  std::mt19937_64 rng(5);
  auto s = scenes::grasp(rng, 4, 0.3);
  const FEPlane p = compute_fe_plane(s.contacts, s.object);
  for (int t = 0; t < 200; ++t) {
    const Eigen::VectorXd a = Eigen::VectorXd::Random(p.force_dim()) * 4.0;
    const Eigen::VectorXd b = Eigen::VectorXd::Random(p.force_dim()) * 4.0;
    const Eigen::VectorXd pa = p.project(a);
    CHECK((p.project(pa) - pa).norm() <= 1e-12);
    CHECK((pa - p.project(b)).norm() <= (a - b).norm() + 1e-12);
  }
}

TEST_CASE("no equilibrium for a single off-axis contact") {
  ContactSet one({Contact::intrinsic({0.05, 0, 0}, {0, 0, 1}, 0.5, 0.1)});
  ObjectModel obj;
  CHECK_THROWS_AS(compute_fe_plane(one, obj), NoEquilibriumError);
}

TEST_CASE("transformed constraints agree with force-space substitution") {
  std::mt19937_64 rng(6);
  auto s = scenes::ring_grasp(3, 0.3);
  const FEPlane p = compute_fe_plane(s.contacts, s.object);
  const ConstraintSet cs = build_constraint_set(s.contacts, 0.5);
  const ConstraintSet fe = transform_constraints(p, cs);
  CHECK(fe.matrix.cols() == p.dimension);
  int feasible = 0, infeasible = 0;
  std::uniform_real_distribution<double> squeeze(0.0, 6.0);
  for (int t = 0; t < 1000; ++t) {
    // Squeezing guesses projected onto the plane land on both sides of the boundary.
    Eigen::VectorXd guess = 0.5 * Eigen::VectorXd::Random(p.force_dim());
    for (std::size_t i = 0; i < s.contacts.size(); ++i) {
      guess.segment<3>(3 * i) += squeeze(rng) * s.contacts[i].normal;
    }
    const Eigen::VectorXd f = p.project(guess);
    const Eigen::VectorXd x = to_fe_coords(p, f);
    const double direct = cs.min_slack(f);
    const double reduced = fe.min_slack(x);
    CHECK(reduced == doctest::Approx(direct).epsilon(1e-9).scale(1.0));
    if (direct >= 1e-9) {
      ++feasible;
      CHECK(fe.contains(x));
    } else if (direct <= -1e-9) {
      ++infeasible;
      CHECK_FALSE(fe.contains(x));
    }
  }
  CHECK(feasible > 0);
  CHECK(infeasible > 0);

  if (cs.contains(p.particular)) CHECK(fe.contains(Eigen::VectorXd::Zero(p.dimension), 1e-12));

  ConstraintSet empty{Eigen::MatrixXd::Zero(0, p.force_dim()), Eigen::VectorXd::Zero(0)};
  const ConstraintSet fe_empty = transform_constraints(p, empty);
  CHECK(fe_empty.rows() == 0);
  CHECK(fe_empty.contains(Eigen::VectorXd::Random(p.dimension)));

  ConstraintSet wrong{Eigen::MatrixXd::Zero(2, 5), Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(transform_constraints(p, wrong), std::invalid_argument);
}
