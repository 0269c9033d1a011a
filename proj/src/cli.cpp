#include "geodex/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "geodex/benchmark.hpp"
#include "geodex/report.hpp"
#include "json.hpp"

namespace geodex {

std::vector<RunReport> run_repetitions(const ScenarioConfig& config, int reps, unsigned threads) {
  if (reps < 1) throw std::invalid_argument("run_repetitions: at least one repetition");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(reps));
  std::vector<RunReport> out(static_cast<std::size_t>(reps));
  std::vector<std::exception_ptr> errors(out.size());
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < reps; r = next++) {
      try {
        ScenarioConfig cfg = config;
        cfg.seed = config.seed + static_cast<std::uint64_t>(r);
        out[static_cast<std::size_t>(r)] = run_scenario(cfg);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

namespace {

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = sd = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double x : v) sd += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(sd / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

RepetitionStats summarize(const std::vector<RunReport>& reports) {
  RepetitionStats s;
  std::vector<double> ok, bad;
  for (const auto& r : reports) {
    ++s.runs;
    (r.success ? ok : bad).push_back(r.final_error);
    s.successes += r.success;
    s.mean_rms_angle_deg += r.rms_angle_error_deg;
  }
  if (s.runs > 0) s.mean_rms_angle_deg /= s.runs;
  mean_std(ok, s.error_success_mean, s.error_success_std);
  mean_std(bad, s.error_failure_mean, s.error_failure_std);
  return s;
}

namespace {

using nlohmann::json;

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

int cmd_plan(const std::string& file, double sigma_scale, const std::string& out_dir,
             std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg = load_scenario(file);
  if (sigma_scale > 0.0) cfg.planning.sigma_scale = sigma_scale;
  const ScenarioPlan sp = plan_scenario(cfg);
  if (!sp.plan) {
    err << cfg.name << ": " << sp.failure << " (sigma scale " << cfg.planning.sigma_scale << ")\n";
    return kExitInfeasible;
  }
  const ForcePlan& p = *sp.plan;
  out << "scenario " << cfg.name << ", " << sp.contacts.size() << " contacts, FE-plane dimension "
      << p.center.size() << "\n";
  out << "contact        fx [N]    fy [N]    fz [N]  normal [N]  cone use\n";
  json contacts = json::array();
  for (std::size_t i = 0; i < sp.contacts.size(); ++i) {
    const Contact& c = sp.contacts[i];
    const Eigen::Vector3d f = p.desired_forces[i];
    const double fn = f.dot(c.normal);
    const double ft = (f - fn * c.normal).norm();
    const double use = fn > 0.0 ? ft / (c.friction_coefficient * fn) : INFINITY;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %9.4f %9.4f %9.4f %11.4f %9.3f\n", c.name.c_str(), f.x(), f.y(),
                  f.z(), fn, use);
    out << line;
    contacts.push_back({{"name", c.name}, {"force_n", {f.x(), f.y(), f.z()}}, {"normal_n", fn},
                        {"cone_use", use}});
  }
  out << "smallest tightened slack " << fmt("%.6g", p.margin) << " N, objective "
      << fmt("%.6g", p.objective) << "\n";
  if (!out_dir.empty()) {
    const json doc = {{"scenario", cfg.name},  {"sigma_scale", cfg.planning.sigma_scale},
                      {"contacts", contacts},  {"margin_n", p.margin},
                      {"objective", p.objective}, {"null_direction_rows", p.null_direction_rows}};
    write_file(prepare_dir(out_dir) / (cfg.name + "_plan.json"), doc.dump(1) + "\n");
  }
  return kExitOk;
}

int cmd_run(const std::string& file, const std::string& feedback, int reps, long long seed,
            const std::string& out_dir, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg = load_scenario(file);
  if (!feedback.empty()) {
    cfg.controller.feedback = feedback == "raw" ? FeedbackSource::Raw : FeedbackSource::Estimated;
  }
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (reps <= 0) reps = cfg.repetitions;

  const ScenarioPlan sp = plan_scenario(cfg);
  if (!sp.plan) {
    err << cfg.name << ": " << sp.failure << "\n";
    return kExitInfeasible;
  }

  const std::vector<RunReport> reports = run_repetitions(cfg, reps);
  const bool pivot = cfg.kind == ScenarioKind::Pivot;
  out << "scenario " << cfg.name << ", feedback " << to_string(cfg.controller.feedback) << ", "
      << reps << " repetitions\n";
  out << (pivot ? "seed   success  final error [N]  rms angle [deg]  final angle [deg]  events\n"
                : "seed   success  final error [N]  max rotation [deg]  events\n");
  for (const auto& r : reports) {
    char line[200];
    if (pivot) {
      std::snprintf(line, sizeof line, "%-6llu %-8s %15.3f %16.2f %18.2f  %zu\n",
                    static_cast<unsigned long long>(r.seed), r.success ? "yes" : "no", r.final_error,
                    r.rms_angle_error_deg, r.final_angle_error_deg, r.events.size());
    } else {
      std::snprintf(line, sizeof line, "%-6llu %-8s %15.3f %19.2f  %zu\n",
                    static_cast<unsigned long long>(r.seed), r.success ? "yes" : "no", r.final_error,
                    r.max_orientation_change_deg, r.events.size());
    }
    out << line;
    if (r.aborted) out << "       aborted: " << r.abort_reason << "\n";
  }

  const RepetitionStats s = summarize(reports);
  auto cell = [](int n, double m, double sd) {
    return n == 0 ? std::string("-") : fmt("%.3f +/- %.3f", m, sd) + " (n=" + std::to_string(n) + ")";
  };
  out << "\nfeedback    success rate   error, successful [N]    error, failed [N]\n";
  char line[200];
  std::snprintf(line, sizeof line, "%-11s %3d/%-3d %4.0f%%   %-24s %s\n", to_string(cfg.controller.feedback),
                s.successes, s.runs, 100.0 * s.successes / s.runs,
                cell(s.successes, s.error_success_mean, s.error_success_std).c_str(),
                cell(s.runs - s.successes, s.error_failure_mean, s.error_failure_std).c_str());
  out << line;
  if (pivot) out << "mean rms angle error " << fmt("%.3f", s.mean_rms_angle_deg) << " deg\n";

  if (!out_dir.empty()) {
    const auto dir = prepare_dir(out_dir);
    for (const auto& r : reports) {
      const std::string stem =
          cfg.name + "_" + to_string(r.feedback) + "_seed" + std::to_string(r.seed);
      write_file(dir / (stem + ".json"), report_to_json(r));
      write_file(dir / (stem + ".csv"), report_to_csv(r));
    }
  }
  return kExitOk;
}

int cmd_bench(const std::vector<int>& steps, int repeats, const std::string& file, std::ostream& out,
              std::ostream& err) {
  const ScenarioConfig cfg = load_scenario(file);
  out << "planning benchmark on " << cfg.name << ", median of " << repeats << " repeats\n";
  out << "steps   geometric [s]   baseline [s]   speed-up\n";
  for (int n : steps) {
    const BenchmarkResult r = run_planning_benchmark(cfg, n, repeats);
    char line[128];
    std::snprintf(line, sizeof line, "%5d %15.6f %14.6f %9.1fx\n", n, r.geometric_seconds, r.baseline_seconds,
                  r.speedup);
    out << line;
    if (!r.baseline_failures.empty()) {
      err << "warning: baseline did not converge on " << r.baseline_failures.size() << " of " << n
          << " steps; those steps are left out of both totals\n";
    }
    if (r.feasibility_disagreements > 0) {
      err << "warning: the two paths disagree on feasibility at " << r.feasibility_disagreements
          << " steps\n";
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"GeoDEx force estimation, planning and grasp simulation"};
  app.require_subcommand(1);

  std::string file, out_dir, feedback;
  double sigma_scale = 0.0;
  int reps = 0;
  long long seed = -1;

  CLI::App* plan = app.add_subcommand("plan", "Plan robust contact forces at the initial geometry");
  plan->add_option("scenario", file, "Scenario file")->required();
  plan->add_option("--sigma-scale", sigma_scale, "Multiply every measurement sigma")
      ->check(CLI::PositiveNumber);
  plan->add_option("--out-dir", out_dir, "Directory for the plan JSON");

  CLI::App* run = app.add_subcommand("run", "Run closed-loop repetitions of a scenario");
  run->add_option("scenario", file, "Scenario file")->required();
  run->add_option("--feedback", feedback, "Feedback source")->check(CLI::IsMember({"est", "estimated", "raw"}));
  run->add_option("--reps", reps, "Repetitions (default: from the file)")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "First seed (default: from the file)")->check(CLI::NonNegativeNumber);
  run->add_option("--out-dir", out_dir, "Directory for JSON reports and CSV traces");

  std::vector<int> steps{100, 300};
  int repeats = 5;
  std::string bench_file = std::string(GEODEX_DEFAULT_SCENARIO_DIR) + "/wrench3.scenario";
  CLI::App* bench = app.add_subcommand("bench", "Time the LP planner against the SOCP baseline");
  bench->add_option("--steps", steps, "Step counts")->check(CLI::PositiveNumber);
  bench->add_option("--repeats", repeats, "Repeats per step count")->check(CLI::PositiveNumber);
  bench->add_option("--scenario", bench_file, "Grasp scenario to plan");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    if (argc <= 1) err << app.help();
    return kExitInput;
  }

  try {
    if (*plan) return cmd_plan(file, sigma_scale, out_dir, out, err);
    if (*run) return cmd_run(file, feedback, reps, seed, out_dir, out, err);
    return cmd_bench(steps, repeats, bench_file, out, err);
  } catch (const ScenarioError& e) {
    err << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace geodex
