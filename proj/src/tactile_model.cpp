#include "geodex/tactile_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace geodex {

namespace {

// Tails below this are reported as zero.
constexpr double kTailFloor = 1e-4;

std::mt19937_64 seeded(std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t k : keys) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

TaxelState::TaxelState(std::uint64_t seed, std::uint64_t finger, std::uint64_t taxel)
    : rng_(seeded({seed, finger, taxel})) {}

double TaxelState::gaussian(double std) {
  const double z = normal_(rng_);
  return std * z;
}

double simulate_taxel(const TaxelSpec& spec, TaxelState& state, double true_force,
                      const TactileConfig& config, double dt, double cos_angle) {
  if (!(true_force >= 0.0)) throw std::invalid_argument("simulate_taxel: negative force");
  const double normal_force = true_force * std::clamp(cos_angle, 0.0, 1.0);
  state.last_true_force = normal_force;

  if (normal_force >= spec.activation_threshold && normal_force > 0.0) {
    state.in_contact = true;
    state.in_hysteresis = false;
    state.time_since_release = 0.0;
    const double raw = normal_force + spec.force_error_offset + state.gaussian(spec.noise_std);
    return std::clamp(raw, 0.0, config.range_max);
  }

  if (state.in_contact) {
    state.in_contact = false;
    state.in_hysteresis = spec.hysteresis_offset > 0.0;
    state.time_since_release = 0.0;
  } else if (state.in_hysteresis) {
    state.time_since_release += dt;
  }
  if (!state.in_hysteresis) return 0.0;

  const double tail = spec.hysteresis_offset *
                      std::exp(-state.time_since_release / config.hysteresis_time_constant);
  if (tail < kTailFloor) {
    state.in_hysteresis = false;
    return 0.0;
  }
  return std::min(tail, config.range_max);
}

FingertipReading aggregate_fingertip(const std::vector<TaxelSpec>& taxels,
                                     const std::vector<double>& readings) {
  if (taxels.size() != readings.size()) {
    throw std::invalid_argument("aggregate_fingertip: one reading per taxel expected");
  }
  FingertipReading out;
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  Eigen::Vector3d nrm = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < taxels.size(); ++i) {
    const double r = readings[i];
    if (r < 0.0) throw std::invalid_argument("aggregate_fingertip: negative reading");
    if (r == 0.0) continue;
    ++out.active_taxel_count;
    out.force_magnitude += r;
    pos += r * taxels[i].position;
    nrm += r * taxels[i].normal;
  }
  if (out.active_taxel_count == 0) return out;
  out.in_contact = true;
  out.contact_position = pos / out.force_magnitude;
  if (nrm.norm() > 0.0) out.contact_normal = nrm.normalized();
  return out;
}

std::vector<TaxelSpec> generate_hemisphere_layout(int count, double radius) {
  if (count < 1 || !(radius > 0.0)) {
    throw std::invalid_argument("hemisphere layout needs a positive count and radius");
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<TaxelSpec> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    // Equal-area bands in z over (0, 1], tip first.
    const double z = 1.0 - (i + 0.5) / count;
    const double ring = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    const Eigen::Vector3d n(ring * std::cos(phi), ring * std::sin(phi), z);
    out[static_cast<std::size_t>(i)].normal = n.normalized();
    out[static_cast<std::size_t>(i)].position = radius * n.normalized();
  }
  return out;
}

std::vector<TaxelSpec> load_taxel_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open taxel layout '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("x_m,y_m,z_m,nx,ny,nz", 0) != 0) {
    throw std::runtime_error(path + ":1: expected header x_m,y_m,z_m,nx,ny,nz");
  }
  std::vector<TaxelSpec> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double v[6];
    for (double& x : v) {
      if (!(ss >> x)) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 6 numbers");
    }
    TaxelSpec t;
    t.position = {v[0], v[1], v[2]};
    t.normal = Eigen::Vector3d(v[3], v[4], v[5]);
    if (std::abs(t.normal.norm() - 1.0) > 1e-6) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": normal is not unit length");
    }
    t.normal.normalize();
    out.push_back(t);
  }
  if (out.empty()) throw std::runtime_error(path + ": no taxels");
  return out;
}

void save_taxel_layout(const std::string& path, const std::vector<TaxelSpec>& layout) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write taxel layout '" + path + "'");
  out.precision(17);
  out << "x_m,y_m,z_m,nx,ny,nz\n";
  for (const auto& t : layout) {
    out << t.position.x() << ',' << t.position.y() << ',' << t.position.z() << ',' << t.normal.x()
        << ',' << t.normal.y() << ',' << t.normal.z() << '\n';
  }
}

std::vector<TaxelSpec> characterize_layout(std::vector<TaxelSpec> layout, const TaxelRanges& r,
                                           std::uint64_t seed, std::uint64_t finger) {
  std::mt19937_64 rng = seeded({seed, finger, 0x7a7e1ULL});
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  TaxelSpec shared;
  auto draw = [&](TaxelSpec& t) {
    t.activation_threshold = uniform(r.threshold_min, r.threshold_max);
    t.hysteresis_offset = uniform(r.hysteresis_min, r.hysteresis_max);
    t.force_error_scale = uniform(r.error_scale_min, r.error_scale_max);
    t.force_error_offset = r.error_gain * uniform(-t.force_error_scale, t.force_error_scale);
    t.noise_std = r.error_gain * uniform(r.noise_min, r.noise_max);
  };
  if (r.uniform) draw(shared);
  for (auto& t : layout) {
    if (r.uniform) {
      t.activation_threshold = shared.activation_threshold;
      t.hysteresis_offset = shared.hysteresis_offset;
      t.force_error_scale = shared.force_error_scale;
      t.force_error_offset = shared.force_error_offset;
      t.noise_std = shared.noise_std;
    } else {
      draw(t);
    }
  }
  return layout;
}

Fingertip::Fingertip(std::vector<TaxelSpec> taxels, TactileConfig config, std::uint64_t seed,
                     std::uint64_t finger)
    : taxels_(std::move(taxels)), readings_(taxels_.size(), 0.0), config_(config) {
  states_.reserve(taxels_.size());
  for (std::size_t i = 0; i < taxels_.size(); ++i) states_.emplace_back(seed, finger, i + 1);
}

FingertipReading Fingertip::sense(const Eigen::Vector3d& contact_point, const Eigen::Vector3d& force,
                                  double dt) {
  const double magnitude = force.norm();
  if (magnitude == 0.0) return release(dt);
  const Eigen::Vector3d dir = force / magnitude;
  std::vector<double> weight(taxels_.size());
  double total = 0.0;
  const double inv = 1.0 / (2.0 * config_.kernel_width * config_.kernel_width);
  for (std::size_t i = 0; i < taxels_.size(); ++i) {
    weight[i] = std::exp(-(taxels_[i].position - contact_point).squaredNorm() * inv);
    total += weight[i];
  }
  for (std::size_t i = 0; i < taxels_.size(); ++i) {
    const double share = total > 0.0 ? magnitude * weight[i] / total : 0.0;
    readings_[i] = simulate_taxel(taxels_[i], states_[i], share, config_, dt, taxels_[i].normal.dot(dir));
  }
  return aggregate_fingertip(taxels_, readings_);
}

FingertipReading Fingertip::release(double dt) {
  for (std::size_t i = 0; i < taxels_.size(); ++i) {
    readings_[i] = simulate_taxel(taxels_[i], states_[i], 0.0, config_, dt);
  }
  return aggregate_fingertip(taxels_, readings_);
}

}  // namespace geodex
