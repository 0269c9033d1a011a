#include <cmath>
#include <random>

#include "doctest.h"
#include "geodex/tactile_model.hpp"

using namespace geodex;

namespace {

TaxelSpec ideal() {
  TaxelSpec t;
  t.normal = Eigen::Vector3d::UnitZ();
  return t;
}

const TactileConfig kConfig{};
constexpr double kDt = 0.01;

}  // namespace

TEST_CASE("below threshold a fresh taxel reads zero") {
  TaxelSpec t = ideal();
  t.activation_threshold = 0.1;
  t.noise_std = 0.02;
  TaxelState s(1, 0, 0);
  CHECK(simulate_taxel(t, s, 0.05, kConfig, kDt) == 0.0);
  CHECK(simulate_taxel(t, s, 0.0, kConfig, kDt) == 0.0);
}

TEST_CASE("release leaves a decaying hysteresis tail") {
  TaxelSpec t = ideal();
  t.activation_threshold = 0.1;
  t.hysteresis_offset = 0.2;
  TaxelState s(1, 0, 0);
  CHECK(simulate_taxel(t, s, 0.0, kConfig, kDt) == 0.0);
  CHECK(simulate_taxel(t, s, 2.0, kConfig, kDt) == doctest::Approx(2.0));
  const double first = simulate_taxel(t, s, 0.0, kConfig, kDt);
  CHECK(first == doctest::Approx(0.2));
  double previous = first;
  for (int k = 0; k < 1000; ++k) {
    const double r = simulate_taxel(t, s, 0.0, kConfig, kDt);
    CHECK(r <= previous);
    previous = r;
  }
  CHECK(previous == 0.0);
  CHECK_FALSE(s.in_hysteresis);
  // Half a time constant after release the tail is 0.2 * exp(-1).
  TaxelState again(1, 0, 0);
  simulate_taxel(t, again, 2.0, kConfig, kDt);
  simulate_taxel(t, again, 0.0, kConfig, kDt);
  double r = 0.0;
  for (int k = 0; k < 50; ++k) r = simulate_taxel(t, again, 0.0, kConfig, kDt);
  CHECK(r == doctest::Approx(0.2 * std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("steady contact noise matches the configured std") {
  TaxelSpec t = ideal();
  t.noise_std = 0.02;
  TaxelState s(7, 1, 3);
  double sum = 0.0, sq = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const double r = simulate_taxel(t, s, 5.0, kConfig, kDt);
    sum += r;
    sq += r * r;
  }
  const double mean = sum / n;
  const double std = std::sqrt(sq / n - mean * mean);
  CHECK(std >= 0.8 * 0.02);
  CHECK(std <= 1.2 * 0.02);
  CHECK(mean == doctest::Approx(5.0).epsilon(1e-3));
}

TEST_CASE("readings stay in the calibrated range") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> force(0.0, 40.0);
  const auto specs = characterize_layout(generate_hemisphere_layout(), TaxelRanges{}, 5, 0);
  std::vector<TaxelState> states;
  for (std::size_t i = 0; i < specs.size(); ++i) states.emplace_back(5, 0, i);
  for (int k = 0; k < 200; ++k) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const double f = k % 7 == 0 ? 0.0 : force(rng);
      const double r = simulate_taxel(specs[i], states[i], f, kConfig, kDt, 0.9);
      CHECK(r >= 0.0);
      CHECK(r <= 20.0);
    }
  }
}

TEST_CASE("with every error channel off the taxel is the identity on its range") {
  TaxelSpec t = ideal();
  TaxelState s(1, 0, 0);
  for (double f = 0.0; f <= 25.0; f += 0.25) {
    CHECK(simulate_taxel(t, s, f, kConfig, kDt) == doctest::Approx(std::min(f, 20.0)).epsilon(1e-15));
  }
}

TEST_CASE("contact angle scales the sensed load") {
  TaxelSpec t = ideal();
  TaxelState s(1, 0, 0);
  CHECK(simulate_taxel(t, s, 4.0, kConfig, kDt, 0.5) == doctest::Approx(2.0));
  CHECK(simulate_taxel(t, s, 4.0, kConfig, kDt, -0.3) == 0.0);
}

TEST_CASE("characterization ranges and determinism") {
  const auto layout = generate_hemisphere_layout();
  const auto a = characterize_layout(layout, TaxelRanges{}, 11, 2);
  const auto b = characterize_layout(layout, TaxelRanges{}, 11, 2);
  const auto c = characterize_layout(layout, TaxelRanges{}, 11, 3);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].activation_threshold >= 0.1);
    CHECK(a[i].activation_threshold <= 0.5);
    CHECK(a[i].hysteresis_offset >= 0.0);
    CHECK(a[i].hysteresis_offset <= 0.2);
    CHECK(a[i].force_error_scale >= 0.1);
    CHECK(a[i].force_error_scale <= 0.5);
    CHECK(std::abs(a[i].force_error_offset) <= a[i].force_error_scale);
    CHECK(a[i].noise_std >= 0.01);
    CHECK(a[i].noise_std <= 0.03);
    CHECK(a[i].activation_threshold == b[i].activation_threshold);
    CHECK(a[i].force_error_offset == b[i].force_error_offset);
    differs = differs || a[i].noise_std != c[i].noise_std;
  }
  CHECK(differs);

  TaxelRanges uniform;
  uniform.uniform = true;
  const auto u = characterize_layout(layout, uniform, 11, 2);
  for (const auto& t : u) CHECK(t.force_error_offset == u.front().force_error_offset);
}

TEST_CASE("aggregation") {
  const auto layout = generate_hemisphere_layout();
  std::vector<double> r(layout.size(), 0.0);
  CHECK_FALSE(aggregate_fingertip(layout, r).in_contact);

  r[5] = 1.3;
  FingertipReading one = aggregate_fingertip(layout, r);
  CHECK(one.in_contact);
  CHECK(one.active_taxel_count == 1);
  CHECK((one.contact_position - layout[5].position).norm() <= 1e-15);
  CHECK((one.contact_normal - layout[5].normal).norm() <= 1e-12);
  CHECK(one.force_magnitude == 1.3);

  std::vector<TaxelSpec> pair(2);
  pair[0].position = {-0.004, 0, 0.01};
  pair[1].position = {0.004, 0, 0.01};
  const FingertipReading mid = aggregate_fingertip(pair, {0.7, 0.7});
  CHECK((mid.contact_position - Eigen::Vector3d(0, 0, 0.01)).norm() <= 1e-15);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(layout.size()), b(layout.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = u(rng) < 0.3 ? 3.0 * u(rng) : 0.0;
      b[i] = 2.0 * a[i];
    }
    a[0] = 0.5, b[0] = 1.0;
    const FingertipReading ra = aggregate_fingertip(layout, a), rb = aggregate_fingertip(layout, b);
    CHECK((ra.contact_position - rb.contact_position).norm() <= 1e-15);
    CHECK((ra.contact_normal - rb.contact_normal).norm() <= 1e-15);
    CHECK(rb.force_magnitude == doctest::Approx(2.0 * ra.force_magnitude).epsilon(1e-15));
  }
  CHECK_THROWS_AS(aggregate_fingertip(layout, {1.0}), std::invalid_argument);
}

TEST_CASE("noiseless fingertip reproduces the analytic load") {
  const auto layout = generate_hemisphere_layout();
  const TactileConfig cfg{};
  Fingertip tip(layout, cfg, 1, 0);
  const Eigen::Vector3d dir = Eigen::Vector3d(0.1, -0.05, 1.0).normalized();
  const Eigen::Vector3d point = 0.012 * dir;
  const Eigen::Vector3d force = 3.0 * dir;
  const FingertipReading got = tip.sense(point, force, kDt);

  // Same kernel written out directly.
  double total_w = 0.0;
  for (const auto& t : layout) total_w += std::exp(-(t.position - point).squaredNorm() / (2 * 0.003 * 0.003));
  double expect_force = 0.0;
  Eigen::Vector3d expect_pos = Eigen::Vector3d::Zero();
  for (const auto& t : layout) {
    const double w = std::exp(-(t.position - point).squaredNorm() / (2 * 0.003 * 0.003)) / total_w;
    const double r = std::max(0.0, 3.0 * w * t.normal.dot(dir));
    expect_force += r;
    expect_pos += r * t.position;
  }
  expect_pos /= expect_force;
  CHECK(got.in_contact);
  CHECK(got.force_magnitude == doctest::Approx(expect_force).epsilon(1e-12));
  CHECK((got.contact_position - expect_pos).norm() <= 1e-12);
  CHECK(got.force_magnitude <= 3.0);
  CHECK(got.force_magnitude >= 0.9 * 3.0);
  CHECK((got.contact_position.normalized() - dir).norm() <= 0.1);
}

TEST_CASE("identical seeds give identical reading sequences") {
  const auto specs = characterize_layout(generate_hemisphere_layout(), TaxelRanges{}, 21, 1);
  Fingertip a(specs, {}, 21, 1), b(specs, {}, 21, 1), c(specs, {}, 22, 1);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const double f = 2.0 + std::sin(0.1 * k);
    const FingertipReading ra = a.sense({0, 0, 0.012}, {0, 0, f}, kDt);
    const FingertipReading rb = b.sense({0, 0, 0.012}, {0, 0, f}, kDt);
    const FingertipReading rc = c.sense({0, 0, 0.012}, {0, 0, f}, kDt);
    CHECK(a.last_readings() == b.last_readings());
    CHECK(ra.force_magnitude == rb.force_magnitude);
    differs = differs || rc.force_magnitude != ra.force_magnitude;
  }
  CHECK(differs);
}

TEST_CASE("ramp, hold and release trace") {
  TaxelSpec t = ideal();
  t.activation_threshold = 0.3;
  t.hysteresis_offset = 0.15;
  t.force_error_scale = 0.4;
  t.force_error_offset = -0.25;
  t.noise_std = 0.02;
  TaxelState s(4, 0, 0);
  // Ramp 0 -> 3 N over 1 s, hold 2 s, drop to zero and watch 1 s.
  for (int k = 0; k <= 100; ++k) {
    const double f = 0.03 * k;
    const double r = simulate_taxel(t, s, f, kConfig, kDt);
    if (f < t.activation_threshold) CHECK(r == 0.0);
  }
  for (int k = 0; k < 200; ++k) {
    const double r = simulate_taxel(t, s, 3.0, kConfig, kDt);
    CHECK(std::abs(r - 3.0) <= t.force_error_scale + 3 * t.noise_std);
  }
  const double tail = simulate_taxel(t, s, 0.0, kConfig, kDt);
  CHECK(tail > 0.0);
  CHECK(tail <= t.hysteresis_offset);
}

TEST_CASE("shipped layout matches the generator") {
  const auto file = load_taxel_layout(GEODEX_DATA_DIR "/taxel_layout_42.csv");
  const auto gen = generate_hemisphere_layout(42, 0.012);
  REQUIRE(file.size() == 42);
  for (std::size_t i = 0; i < gen.size(); ++i) {
    CHECK((file[i].position - gen[i].position).norm() <= 1e-15);
    CHECK((file[i].normal - gen[i].normal).norm() <= 1e-15);
    CHECK(file[i].position.z() > 0.0);
    CHECK(std::abs(file[i].position.norm() - 0.012) <= 1e-15);
  }
  CHECK_THROWS_AS(load_taxel_layout("/nonexistent/layout.csv"), std::runtime_error);
}
