#include "geodex/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "geodex/fe_subspace.hpp"
#include "geodex/force_planning.hpp"

namespace geodex {

namespace {

using Clock = std::chrono::steady_clock;

struct Scene {
  ContactSet contacts;
  ObjectModel object;
};

std::vector<Scene> scenes(const ScenarioConfig& cfg, int steps) {
  if (cfg.intrinsic_count() != cfg.contacts.size()) {
    throw std::invalid_argument("benchmark needs a grasp without environment contacts");
  }
  const Eigen::Vector3d com = cfg.object.center_of_mass;
  std::vector<Scene> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    // Up to 15 degrees of roll over the sequence.
    const double angle = 0.26 * k / std::max(1, steps - 1);
    const Eigen::Matrix3d r = Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitX()).toRotationMatrix();
    std::vector<Contact> cs;
    for (const auto& c : cfg.contacts) {
      cs.push_back(Contact::intrinsic(com + r * (c.position - com), r * c.normal, c.friction,
                                      c.sigma * cfg.planning.sigma_scale, c.name));
    }
    ObjectModel o;
    o.mass = cfg.object.mass;
    o.center_of_mass = com;
    out.push_back({ContactSet(std::move(cs)), o});
  }
  return out;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

BenchmarkResult run_planning_benchmark(const ScenarioConfig& cfg, int steps, int repeats) {
  if (steps < 1 || repeats < 1) throw std::invalid_argument("benchmark: steps and repeats must be positive");
  const std::vector<Scene> sc = scenes(cfg, steps);

  BaselineOptions opt;
  opt.min_intrinsic_force = cfg.planning.min_force;
  opt.max_intrinsic_force = cfg.planning.max_force;

  BenchmarkResult out;
  out.steps = steps;
  out.repeats = repeats;
  std::vector<double> geo_totals, base_totals;
  for (int rep = 0; rep < repeats; ++rep) {
    double geo_total = 0.0, base_total = 0.0;
    std::vector<int> failures;
    int geo_infeasible = 0, base_infeasible = 0, disagreements = 0;
    for (int k = 0; k < steps; ++k) {
      const Scene& s = sc[static_cast<std::size_t>(k)];

      auto start = Clock::now();
      const FEPlane plane = compute_fe_plane(s.contacts, s.object);
      const ConstraintSet cs = append_max_force_rows(
          build_constraint_set(s.contacts, cfg.planning.min_force, cfg.planning.pyramid_sides),
          s.contacts, cfg.planning.max_force);
      const ForcePlan geo =
          plan_grasp_forces(plane, cs, s.contacts, build_uncertainty(plane, s.contacts),
                            cfg.planning.objective);
      const double geo_time = seconds_since(start);

      start = Clock::now();
      bool converged = true;
      bool base_feasible = false;
      try {
        const FEPlane plane_b = compute_fe_plane(s.contacts, s.object);
        const BaselinePlan base = socp_baseline_plan(plane_b, s.contacts, s.object,
                                                     build_uncertainty(plane_b, s.contacts), opt);
        base_feasible = base.plan.feasible;
      } catch (const SocpSolverError&) {
        converged = false;
      }
      const double base_time = seconds_since(start);

      if (!converged) {
        failures.push_back(k);
        continue;
      }
      geo_total += geo_time;
      base_total += base_time;
      geo_infeasible += !geo.feasible;
      base_infeasible += !base_feasible;
      disagreements += geo.feasible != base_feasible;
    }
    geo_totals.push_back(geo_total);
    base_totals.push_back(base_total);
    out.baseline_failures = failures;
    out.geometric_infeasible = geo_infeasible;
    out.baseline_infeasible = base_infeasible;
    out.feasibility_disagreements = disagreements;
  }
  out.geometric_seconds = median(geo_totals);
  out.baseline_seconds = median(base_totals);
  out.speedup = out.geometric_seconds > 0.0 ? out.baseline_seconds / out.geometric_seconds : 0.0;
  return out;
}

}  // namespace geodex
