#pragma once

#include "kcplan/experiment.hpp"

#include <CLI11.hpp>

#include <string>
#include <vector>

namespace kcplan {

class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, std::string usage, int exit_code = 2)
      : std::runtime_error(what), usage_(std::move(usage)), exit_code_(exit_code) {}

  const std::string& usage() const { return usage_; }
  /// 0 when help was requested.
  int exit_code() const { return exit_code_; }

 private:
  std::string usage_;
  int exit_code_;
};

namespace detail {

inline std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace detail

/// Parses the benchmark command line. Throws UsageError on invalid input
/// (and with exit code 0 for --help).
inline ExperimentConfig parse_cli(int argc, const char* const* argv) {
  CLI::App app{"Sampling-strategy benchmark for motion planning on implicit manifolds"};
  app.footer("Problems: " + detail::join_names(problem_names()) +
             "\nStrategies: ambient-uniform, dynamic-domain, kdtree, atlas, atlas-dd");

  ExperimentConfig cfg;
  std::vector<std::string> strategies;
  std::string format = "csv";
  PlannerOverrides& o = cfg.overrides;

  app.add_option("--problem", cfg.problem, "Registered problem name")->required();
  app.add_option("--strategy", strategies, "Sampling strategy (repeatable; default: all five)");
  app.add_option("--trials", cfg.trials, "Trials per strategy")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Seed of the first trial; trial i uses seed + i");
  app.add_option("--delta", o.delta, "Branch step size")->check(CLI::PositiveNumber);
  app.add_option("--big-r", o.big_r, "Dynamic-domain radius R (inf disables)")->check(CLI::PositiveNumber);
  app.add_option("--r", o.r, "kd-tree r-bounding margin")->check(CLI::NonNegativeNumber);
  app.add_option("--rho", o.rho, "Chart span radius")->check(CLI::PositiveNumber);
  app.add_option("--rho-s", o.rho_s, "Base chart sampling radius")->check(CLI::PositiveNumber);
  app.add_option("--alpha", o.alpha, "Sampling-radius adaptation factor in [0, 1)")->check(CLI::Range(0.0, 0.999999));
  app.add_option("--eps-dist", o.eps_dist, "Chart distance threshold")->check(CLI::PositiveNumber);
  app.add_option("--cos-theta", o.cos_theta, "Chart curvature threshold (cosine)")->check(CLI::Range(-1.0, 1.0));
  app.add_option("--timeout", o.timeout, "Wall-clock budget per trial, seconds")->check(CLI::NonNegativeNumber);
  app.add_option("--max-iters", o.max_iterations, "Iteration cap per trial")->check(CLI::PositiveNumber);
  app.add_option("--slot-width", cfg.problem_options.slot_width, "Wall window width")->check(CLI::PositiveNumber);
  app.add_option("--wall-thickness", cfg.problem_options.wall_thickness, "Wall thickness")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out, "Output file (default: stdout)");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--path-out", cfg.path_out, "Write the first successful path to this file");
  app.add_option("--jobs", cfg.jobs, "Concurrent trials")->check(CLI::PositiveNumber);
  app.add_flag("!--no-time", cfg.record_time, "Omit wall times from the report (byte-stable output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw UsageError("help requested", app.help(), 0);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what(), app.help());
  }

  cfg.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
  if (strategies.empty()) {
    cfg.strategies.assign(std::begin(kAllStrategies), std::end(kAllStrategies));
  }
  for (const auto& name : strategies) {
    const auto s = parse_strategy(name);
    if (!s) throw UsageError("unknown strategy: " + name, app.help());
    cfg.strategies.push_back(*s);
  }
  const auto names = problem_names();
  if (std::find(names.begin(), names.end(), cfg.problem) == names.end()) {
    throw UsageError("unknown problem: " + cfg.problem, app.help());
  }
  return cfg;
}

}  // namespace kcplan
