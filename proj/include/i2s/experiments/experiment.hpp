#pragma once

#include "i2s/executor/executor.hpp"
#include "i2s/executor/log.hpp"
#include "i2s/executor/run_config.hpp"
#include "i2s/foresight/foresight.hpp"
#include "i2s/sim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace i2s::experiments {

enum class Method { imagine2servo, rtvs_final, cam_axis };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::imagine2servo: return "imagine2servo";
    case Method::rtvs_final: return "rtvs-final";
    case Method::cam_axis: return "cam-axis";
  }
  return "?";
}

inline Method method_from_string(const std::string& s) {
  if (s == "imagine2servo") return Method::imagine2servo;
  if (s == "rtvs-final") return Method::rtvs_final;
  if (s == "cam-axis") return Method::cam_axis;
  throw std::invalid_argument("unknown method '" + s + "'");
}

struct ExperimentSpec {
  sim::Task task = sim::Task::door;
  Method method = Method::imagine2servo;
  int trials = 20;
  std::uint64_t seed = 0;  // trial i uses scenario seed + i, identical across methods
  executor::RunConfig config = executor::default_run_config();
  std::string out_dir;  // empty: nothing written
  int workers = 1;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("ExperimentSpec: trials must be >= 1");
    if (workers < 1) throw std::invalid_argument("ExperimentSpec: workers must be >= 1");
    config.validate();
  }
};

/// One row of the per-trial CSV.
struct TrialRow {
  std::uint64_t seed = 0;
  std::string method;
  executor::Outcome outcome = executor::Outcome::timeout;
  double trans_err = 0.0;
  double rot_err = 0.0;
  int steps = 0;
  int collisions = 0;
};

/// Pose-error means cover every trial that did not end in a collision (timeouts at their final pose).
struct AggregateMetrics {
  std::string method;
  int trials = 0;
  int successes = 0;
  int collisions = 0;
  int error_trials = 0;
  double success_rate = 0.0;
  double collision_rate = 0.0;
  double mean_trans_err = 0.0;
  double mean_rot_err = 0.0;
  double mean_steps = 0.0;
};

inline constexpr const char* kTrialCsvHeader = "seed,method,outcome,trans_err_m,rot_err,steps,collisions";
inline constexpr const char* kAggregateCsvHeader =
    "method,trials,successes,success_rate,collision_rate,mean_trans_err_m,mean_rot_err,mean_steps,error_trials";

namespace detail {
inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}
}  // namespace detail

inline std::string to_csv(const TrialRow& r) {
  return std::to_string(r.seed) + "," + r.method + "," + executor::to_string(r.outcome) + "," + detail::fmt(r.trans_err) +
         "," + detail::fmt(r.rot_err) + "," + std::to_string(r.steps) + "," + std::to_string(r.collisions);
}

inline std::string to_csv(const AggregateMetrics& m) {
  return m.method + "," + std::to_string(m.trials) + "," + std::to_string(m.successes) + "," +
         detail::fmt(m.success_rate) + "," + detail::fmt(m.collision_rate) + "," + detail::fmt(m.mean_trans_err) + "," +
         detail::fmt(m.mean_rot_err) + "," + detail::fmt(m.mean_steps) + "," + std::to_string(m.error_trials);
}

inline std::vector<TrialRow> read_trial_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTrialCsvHeader) throw std::runtime_error("trial csv: unexpected header");
  std::vector<TrialRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = detail::split_csv(line);
    if (c.size() != 7) throw std::runtime_error("trial csv: line " + std::to_string(lineno) + ": expected 7 fields");
    try {
      rows.push_back({std::stoull(c[0]), c[1], executor::outcome_from_string(c[2]), std::stod(c[3]), std::stod(c[4]),
                      std::stoi(c[5]), std::stoi(c[6])});
    } catch (const std::exception& e) {
      throw std::runtime_error("trial csv: line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

inline AggregateMetrics aggregate(const std::vector<TrialRow>& rows, const std::string& method) {
  AggregateMetrics m;
  m.method = method;
  double steps = 0.0;
  for (const auto& r : rows) {
    ++m.trials;
    steps += r.steps;
    if (r.outcome == executor::Outcome::success) ++m.successes;
    if (r.outcome == executor::Outcome::collision) {
      ++m.collisions;
      continue;
    }
    ++m.error_trials;
    m.mean_trans_err += r.trans_err;
    m.mean_rot_err += r.rot_err;
  }
  if (m.trials > 0) {
    m.success_rate = static_cast<double>(m.successes) / m.trials;
    m.collision_rate = static_cast<double>(m.collisions) / m.trials;
    m.mean_steps = steps / m.trials;
  }
  if (m.error_trials > 0) {
    m.mean_trans_err /= m.error_trials;
    m.mean_rot_err /= m.error_trials;
  }
  return m;
}

/// Runs one trial of the given method on the scenario generated from `seed`.
inline executor::TrialResult run_method(sim::Task task, Method method, std::uint64_t seed,
                                        const executor::RunConfig& cfg) {
  const sim::Scenario scenario = sim::make_scenario(task, seed);
  switch (method) {
    case Method::imagine2servo: {
      foresight::KeyframeOracle oracle(scenario, cfg.oracle);
      executor::FlowServoController controller(cfg);
      return executor::run_trial(scenario, cfg, oracle, controller);
    }
    case Method::rtvs_final: {
      executor::FlowServoController controller(cfg);
      return executor::run_final_image_servo(scenario, cfg, controller);
    }
    case Method::cam_axis:
      return executor::run_camera_axis(scenario, cfg);
  }
  throw std::logic_error("unreachable");
}

struct ExperimentResult {
  AggregateMetrics metrics;
  std::vector<TrialRow> rows;
  std::vector<executor::TrialResult> trials;
};

inline std::string log_name(Method method, std::uint64_t seed) {
  return std::string(to_string(method)) + "_seed" + std::to_string(seed) + ".jsonl";
}

/// Trials run on `workers` threads; results are reduced in seed order, so outputs do not depend
/// on the worker count.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.trials);
  ExperimentResult out;
  out.trials.resize(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out.trials[i] = run_method(spec.task, spec.method, spec.seed + i, spec.config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::min<int>(spec.workers, spec.trials);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = out.trials[i];
    const bool collided = t.outcome == executor::Outcome::collision;
    out.rows.push_back({spec.seed + i, to_string(spec.method), t.outcome, t.trans_err, t.rot_err, t.steps, collided ? 1 : 0});
  }
  out.metrics = aggregate(out.rows, to_string(spec.method));

  if (!spec.out_dir.empty()) {
    const std::filesystem::path dir(spec.out_dir);
    std::string csv = std::string(kTrialCsvHeader) + "\n";
    for (const auto& r : out.rows) csv += to_csv(r) + "\n";
    detail::write_file(dir / "trials.csv", csv);
    detail::write_file(dir / "aggregate.csv", std::string(kAggregateCsvHeader) + "\n" + to_csv(out.metrics) + "\n");
    for (std::size_t i = 0; i < n; ++i) {
      std::ostringstream log;
      executor::write_log(log, out.trials[i]);
      detail::write_file(dir / "logs" / log_name(spec.method, spec.seed + i), log.str());
    }
  }
  return out;
}

struct AblationRow {
  int n = 0;
  AggregateMetrics metrics;
};

inline constexpr const char* kAblationCsvHeader = "n,trials,successes,success_rate";

/// Paired design: every arm runs the same seeds; only the oracle's keyframe count changes.
inline std::vector<AblationRow> ablate_n(const ExperimentSpec& spec, const std::vector<int>& n_values) {
  if (n_values.empty()) throw std::invalid_argument("ablate_n: empty n list");
  for (int n : n_values)
    if (n < 2) throw std::invalid_argument("ablate_n: every n must be >= 2");
  std::vector<AblationRow> table;
  for (int n : n_values) {
    ExperimentSpec arm = spec;
    arm.method = Method::imagine2servo;
    arm.config.oracle.n = n;
    if (!spec.out_dir.empty()) arm.out_dir = (std::filesystem::path(spec.out_dir) / ("n" + std::to_string(n))).string();
    table.push_back({n, run_experiment(arm).metrics});
  }
  if (!spec.out_dir.empty()) {
    std::string csv = std::string(kAblationCsvHeader) + "\n";
    for (const auto& r : table)
      csv += std::to_string(r.n) + "," + std::to_string(r.metrics.trials) + "," + std::to_string(r.metrics.successes) +
             "," + detail::fmt(r.metrics.success_rate) + "\n";
    detail::write_file(std::filesystem::path(spec.out_dir) / "ablation.csv", csv);
  }
  return table;
}

struct Curves {
  std::string photometric;  // step,subgoal,boundary,photometric_error
  std::string linear;       // step,subgoal,boundary,linear_speed
  std::string angular;      // step,subgoal,boundary,angular_speed
};

/// boundary = 1 on the first step servoing toward a new sub-goal.
inline Curves make_curves(const executor::TrialResult& trial) {
  Curves c{"step,subgoal,boundary,photometric_error\n", "step,subgoal,boundary,linear_speed\n",
           "step,subgoal,boundary,angular_speed\n"};
  int prev = -1;
  for (const auto& r : trial.records) {
    const bool boundary = prev >= 0 && r.subgoal != prev;
    prev = r.subgoal;
    const std::string key = std::to_string(r.step) + "," + std::to_string(r.subgoal) + "," + (boundary ? "1" : "0") + ",";
    c.photometric += key + detail::fmt(r.photometric_error) + "\n";
    c.linear += key + detail::fmt(r.twist.linear.norm()) + "\n";
    c.angular += key + detail::fmt(r.twist.angular.norm()) + "\n";
  }
  return c;
}

inline void emit_curves(std::istream& log, const std::string& out_dir) {
  const Curves c = make_curves(executor::read_log(log));
  const std::filesystem::path dir(out_dir);
  detail::write_file(dir / "photometric_error.csv", c.photometric);
  detail::write_file(dir / "linear_speed.csv", c.linear);
  detail::write_file(dir / "angular_speed.csv", c.angular);
}

}  // namespace i2s::experiments
