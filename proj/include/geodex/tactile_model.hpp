#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace geodex {

/// One piezo-electric taxel in the fingertip frame. The normal points out of
/// the fingertip surface.
struct TaxelSpec {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double activation_threshold = 0.0;  // N
  double hysteresis_offset = 0.0;     // N
  double force_error_scale = 0.0;     // N, bound on |force_error_offset|
  double force_error_offset = 0.0;    // N, fixed per taxel
  double noise_std = 0.0;             // N
};

/// Ranges the per-taxel characteristics are drawn from.
struct TaxelRanges {
  double threshold_min = 0.1, threshold_max = 0.5;
  double hysteresis_min = 0.0, hysteresis_max = 0.2;
  double error_scale_min = 0.1, error_scale_max = 0.5;
  double noise_min = 0.01, noise_max = 0.03;
  /// Draw once and share across the fingertip instead of once per taxel.
  bool uniform = false;
  /// Multiplies the drawn noise std and error offsets (0 disables both).
  double error_gain = 1.0;
};

struct TactileConfig {
  double range_max = 20.0;                 // N, calibrated upper limit
  double hysteresis_time_constant = 0.5;   // s
  double kernel_width = 0.003;             // m, spread of a point load over taxels
};

class TaxelState {
 public:
  TaxelState() = default;
  TaxelState(std::uint64_t seed, std::uint64_t finger, std::uint64_t taxel);

  double last_true_force = 0.0;
  bool in_contact = false;
  bool in_hysteresis = false;
  double time_since_release = 0.0;

  double gaussian(double std);

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Advances one taxel by dt. `true_force` is the load share on the taxel and
/// `cos_angle` the cosine between that load and the taxel normal. While in
/// contact the reading is clamp(F cos + offset + noise, 0, range_max); after
/// release it is hysteresis_offset * exp(-t / tau) until contact resumes.
double simulate_taxel(const TaxelSpec& spec, TaxelState& state, double true_force,
                      const TactileConfig& config, double dt, double cos_angle = 1.0);

struct FingertipReading {
  bool in_contact = false;
  Eigen::Vector3d contact_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d contact_normal = Eigen::Vector3d::UnitZ();
  double force_magnitude = 0.0;
  int active_taxel_count = 0;
};

/// Force-weighted average of taxel positions and normals; zero readings are
/// ignored. All-zero input gives in_contact = false.
FingertipReading aggregate_fingertip(const std::vector<TaxelSpec>& taxels,
                                     const std::vector<double>& readings);

/// Evenly spread taxels over the +z hemisphere of a sphere (golden-angle
/// spiral), normals pointing outward.
std::vector<TaxelSpec> generate_hemisphere_layout(int count = 42, double radius = 0.012);

/// CSV with header x_m,y_m,z_m,nx,ny,nz; one taxel per line.
std::vector<TaxelSpec> load_taxel_layout(const std::string& path);
void save_taxel_layout(const std::string& path, const std::vector<TaxelSpec>& layout);

/// Fills the characteristics of a layout from `ranges`, deterministically in
/// (seed, finger).
std::vector<TaxelSpec> characterize_layout(std::vector<TaxelSpec> layout, const TaxelRanges& ranges,
                                           std::uint64_t seed, std::uint64_t finger);

/// A tactile fingertip: characterized taxels plus their states.
class Fingertip {
 public:
  Fingertip(std::vector<TaxelSpec> taxels, TactileConfig config, std::uint64_t seed,
            std::uint64_t finger);

  /// Spreads a point load over the taxels with a Gaussian kernel and advances
  /// all of them. `contact_point` and `force` are in the fingertip frame;
  /// `force` is what the fingertip pushes onto the object.
  FingertipReading sense(const Eigen::Vector3d& contact_point, const Eigen::Vector3d& force,
                         double dt);
  /// Advances all taxels with no load.
  FingertipReading release(double dt);

  const std::vector<TaxelSpec>& taxels() const { return taxels_; }
  const std::vector<double>& last_readings() const { return readings_; }

 private:
  std::vector<TaxelSpec> taxels_;
  std::vector<TaxelState> states_;
  std::vector<double> readings_;
  TactileConfig config_;
};

}  // namespace geodex
