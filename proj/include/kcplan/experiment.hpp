#pragma once

// Multi-seed, multi-strategy experiment runner and its CSV / JSON reports.

#include "kcplan/planner.hpp"
#include "kcplan/problems.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace kcplan {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kCsvHeader = "problem,strategy,seed,t,cd_tests,col_bran,succ,rej";

enum class OutputFormat { Csv, Json };

/// Values left unset fall back to the problem's tuned configuration.
struct PlannerOverrides {
  std::optional<double> delta;
  std::optional<double> big_r;
  std::optional<double> r;
  std::optional<double> rho;
  std::optional<double> rho_s;
  std::optional<double> alpha;
  std::optional<double> eps_dist;
  std::optional<double> cos_theta;
  std::optional<double> timeout;
  std::optional<std::uint64_t> max_iterations;
};

struct ExperimentConfig {
  std::string problem;
  std::vector<Strategy> strategies;
  int trials = 50;
  std::uint64_t seed = 0;
  PlannerOverrides overrides;
  ProblemOptions problem_options;
  std::string out;  // empty: standard output
  OutputFormat format = OutputFormat::Csv;
  std::string path_out;  // optional path file of the first successful trial
  int jobs = 1;
  bool record_time = true;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
    if (strategies.empty()) throw std::invalid_argument("ExperimentConfig: no strategy given");
    if (jobs < 1) throw std::invalid_argument("ExperimentConfig: jobs must be >= 1");
  }
};

/// Planner configuration for one strategy on one problem after overrides.
inline PlannerConfig resolve_config(const ProblemSpec& problem, Strategy strategy, const PlannerOverrides& o) {
  PlannerConfig cfg = problem.tuned;
  cfg.strategy = strategy;
  if (o.delta) cfg.delta = *o.delta;
  if (o.big_r) cfg.big_r = *o.big_r;
  if (o.r) cfg.r = *o.r;
  if (o.rho) {
    cfg.atlas.rho = *o.rho;
    if (!o.eps_dist) cfg.atlas.eps_dist = 0.1 * *o.rho;
  }
  if (o.rho_s) cfg.atlas.rho_s = *o.rho_s;
  if (o.alpha) cfg.atlas.alpha = *o.alpha;
  if (o.eps_dist) cfg.atlas.eps_dist = *o.eps_dist;
  if (o.cos_theta) cfg.atlas.cos_theta_min = *o.cos_theta;
  if (o.timeout) cfg.time_budget = *o.timeout;
  if (o.max_iterations) cfg.max_iterations = *o.max_iterations;
  return cfg;
}

struct TrialRecord {
  std::string problem;
  Strategy strategy = Strategy::AmbientUniform;
  std::uint64_t seed = 0;
  PlanResult result;
};

/// Averages over successful trials only; failures just lower the success ratio.
struct AggregateRecord {
  std::string problem;
  Strategy strategy = Strategy::AmbientUniform;
  int trials = 0;
  int successes = 0;
  double success_ratio = 0.0;
  std::optional<double> t;
  std::optional<double> cd_tests;
  std::optional<double> col_bran;
  std::optional<double> rej;
};

struct ExperimentReport {
  std::vector<TrialRecord> trials;  // ordered by (strategy, trial index)
  std::vector<AggregateRecord> aggregates;
  bool record_time = true;
};

inline AggregateRecord aggregate(const std::vector<TrialRecord>& rows, const std::string& problem,
                                 Strategy strategy) {
  AggregateRecord a;
  a.problem = problem;
  a.strategy = strategy;
  double t = 0.0;
  double cd = 0.0;
  double col = 0.0;
  double rej = 0.0;
  for (const auto& row : rows) {
    if (row.strategy != strategy) continue;
    ++a.trials;
    if (!row.result.success) continue;
    ++a.successes;
    t += row.result.stats.wall_time;
    cd += static_cast<double>(row.result.stats.cd_tests);
    col += row.result.stats.collision_branch_ratio();
    rej += row.result.stats.rejection_ratio();
  }
  a.success_ratio = a.trials == 0 ? 0.0 : static_cast<double>(a.successes) / a.trials;
  if (a.successes > 0) {
    const double s = a.successes;
    a.t = t / s;
    a.cd_tests = cd / s;
    a.col_bran = col / s;
    a.rej = rej / s;
  }
  return a;
}

/// Runs one trial with a fresh obstacle set (and thus a fresh CD counter).
inline PlanResult run_trial(const ProblemSpec& problem, const PlannerConfig& cfg) {
  ObstacleSet obstacles = problem.make_obstacles();
  return plan_bidirectional(problem.system, obstacles, problem.start, problem.goal, cfg);
}

/// Every strategy x trial runs with seed = cfg.seed + trial index. Rows come
/// back in (strategy, trial) order whatever the number of worker threads.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ProblemSpec problem = make_problem(cfg.problem, cfg.problem_options);
  std::vector<PlannerConfig> configs;
  for (Strategy s : cfg.strategies) {
    configs.push_back(resolve_config(problem, s, cfg.overrides));
    configs.back().validate();
  }

  ExperimentReport report;
  report.record_time = cfg.record_time;
  const std::size_t per = static_cast<std::size_t>(cfg.trials);
  report.trials.resize(cfg.strategies.size() * per);
  for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
    for (std::size_t ti = 0; ti < per; ++ti) {
      TrialRecord& rec = report.trials[si * per + ti];
      rec.problem = problem.name;
      rec.strategy = cfg.strategies[si];
      rec.seed = cfg.seed + ti;
    }
  }

  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      std::size_t job = 0;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= report.trials.size() || failure) return;
        job = next++;
      }
      try {
        TrialRecord& rec = report.trials[job];
        PlannerConfig pc = configs[job / per];
        pc.seed = rec.seed;
        rec.result = run_trial(problem, pc);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(report.trials.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (Strategy s : cfg.strategies) report.aggregates.push_back(aggregate(report.trials, problem.name, s));
  return report;
}

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string opt_fmt(const char* spec, const std::optional<double>& v) { return v ? fmt(spec, *v) : ""; }

}  // namespace detail

/// Per-trial CSV row (no trailing newline).
inline std::string csv_row(const TrialRecord& r, bool record_time) {
  const RunStats& s = r.result.stats;
  std::ostringstream os;
  os << r.problem << ',' << to_string(r.strategy) << ',' << r.seed << ','
     << (record_time ? detail::fmt("%.6f", s.wall_time) : "NA") << ',' << s.cd_tests << ','
     << detail::fmt("%.6f", s.collision_branch_ratio()) << ',' << (r.result.success ? 1 : 0) << ','
     << detail::fmt("%.6f", s.rejection_ratio());
  return os.str();
}

inline std::string csv_aggregate_row(const AggregateRecord& a, bool record_time) {
  std::ostringstream os;
  os << a.problem << ',' << to_string(a.strategy) << ",mean,"
     << (record_time ? detail::opt_fmt("%.6f", a.t) : (a.t ? "NA" : "")) << ','
     << detail::opt_fmt("%.1f", a.cd_tests) << ',' << detail::opt_fmt("%.6f", a.col_bran) << ','
     << detail::fmt("%.6f", a.success_ratio) << ',' << detail::opt_fmt("%.6f", a.rej);
  return os.str();
}

inline void write_csv(std::ostream& os, const ExperimentReport& report) {
  os << kCsvHeader << '\n';
  for (const auto& r : report.trials) os << csv_row(r, report.record_time) << '\n';
  for (const auto& a : report.aggregates) os << csv_aggregate_row(a, report.record_time) << '\n';
}

inline void write_json(std::ostream& os, const ExperimentReport& report) {
  using nlohmann::json;
  json doc;
  doc["schema_version"] = kReportSchemaVersion;
  json trials = json::array();
  for (const auto& r : report.trials) {
    const RunStats& s = r.result.stats;
    json row{{"problem", r.problem},
             {"strategy", std::string(to_string(r.strategy))},
             {"seed", r.seed},
             {"succ", r.result.success},
             {"timed_out", r.result.timed_out},
             {"cd_tests", s.cd_tests},
             {"col_bran", s.collision_branch_ratio()},
             {"rej", s.rejection_ratio()},
             {"branches", s.branches},
             {"collision_branches", s.collision_branches},
             {"draws", s.draws},
             {"rejections", s.rejections},
             {"iterations", s.iterations},
             {"start_nodes", s.start_nodes},
             {"goal_nodes", s.goal_nodes},
             {"path_length", r.result.path.size()}};
    row["t"] = report.record_time ? json(s.wall_time) : json(nullptr);
    if (uses_atlas(r.strategy)) {
      row["charts"] = s.charts;
      row["final_scaling"] = s.final_scaling;
      row["radius_floor_violations"] = s.radius_floor_violations;
    }
    trials.push_back(std::move(row));
  }
  json aggs = json::array();
  for (const auto& a : report.aggregates) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    aggs.push_back({{"problem", a.problem},
                    {"strategy", std::string(to_string(a.strategy))},
                    {"trials", a.trials},
                    {"successes", a.successes},
                    {"succ", a.success_ratio},
                    {"t", report.record_time ? opt(a.t) : json(nullptr)},
                    {"cd_tests", opt(a.cd_tests)},
                    {"col_bran", opt(a.col_bran)},
                    {"rej", opt(a.rej)}});
  }
  doc["trials"] = std::move(trials);
  doc["aggregates"] = std::move(aggs);
  os << doc.dump(2) << '\n';
}

/// Plain-text path: a "n k" header line, then one configuration per line.
inline void write_path(std::ostream& os, const std::vector<Vector>& path, int n, int k) {
  os << n << ' ' << k << '\n';
  char buf[40];
  for (const auto& q : path) {
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", q[i]);
      os << (i ? " " : "") << buf;
    }
    os << '\n';
  }
}

}  // namespace kcplan
