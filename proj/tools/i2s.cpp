// i2s: scenario generation, batch evaluation, ablations and curve extraction.

#include "i2s/i2s.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace i2s;

namespace {

struct Options {
  std::string task = "door";
  std::string method = "imagine2servo";
  int trials = 20;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
  std::string config;
  std::vector<int> n_values{2, 4, 9};
  // run-config shortcuts
  std::optional<int> n;
  std::optional<std::string> flow;
  std::optional<std::string> depth;
  std::optional<double> noise_t;
  std::optional<double> noise_r_deg;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

// Flags first, then the config file on top of them.
experiments::ExperimentSpec build_spec(const Options& o) {
  experiments::ExperimentSpec spec;
  spec.task = sim::task_from_string(o.task);
  spec.method = experiments::method_from_string(o.method);
  spec.trials = o.trials;
  spec.seed = o.seed;
  spec.workers = o.workers;
  spec.out_dir = o.out;
  auto& cfg = spec.config;
  if (o.n) cfg.oracle.n = *o.n;
  if (o.flow) cfg.flow_source = executor::flow_source_from_string(*o.flow);
  if (o.depth) cfg.depth_source = executor::depth_source_from_string(*o.depth);
  if (o.noise_t) cfg.oracle.noise.sigma_t = *o.noise_t;
  if (o.noise_r_deg) cfg.oracle.noise.sigma_r = *o.noise_r_deg * std::numbers::pi / 180.0;

  if (!o.config.empty()) {
    nlohmann::json j = read_json(o.config);
    if (!j.is_object()) throw std::runtime_error(o.config + ": expected a JSON object");
    if (j.contains("experiment")) {
      const auto& e = j.at("experiment");
      if (e.contains("task")) spec.task = sim::task_from_string(e.at("task").get<std::string>());
      if (e.contains("method")) spec.method = experiments::method_from_string(e.at("method").get<std::string>());
      if (e.contains("trials")) spec.trials = e.at("trials").get<int>();
      if (e.contains("seed")) spec.seed = e.at("seed").get<std::uint64_t>();
      if (e.contains("workers")) spec.workers = e.at("workers").get<int>();
      if (e.contains("out")) spec.out_dir = e.at("out").get<std::string>();
      j.erase("experiment");
    }
    if (j.contains("run")) cfg = executor::run_config_from_json(j.at("run"), cfg);
    j.erase("run");
    if (!j.empty()) throw std::runtime_error(o.config + ": unknown top-level key '" + j.begin().key() + "'");
  }
  spec.validate();
  return spec;
}

std::vector<int> config_n_values(const Options& o) {
  if (o.config.empty()) return o.n_values;
  const auto j = read_json(o.config);
  if (j.contains("experiment") && j.at("experiment").contains("n_values"))
    return j.at("experiment").at("n_values").get<std::vector<int>>();
  return o.n_values;
}

void print_aggregate(const std::vector<experiments::AggregateMetrics>& rows) {
  std::cout << experiments::kAggregateCsvHeader << '\n';
  for (const auto& m : rows) std::cout << experiments::to_csv(m) << '\n';
}

void add_experiment_flags(CLI::App* cmd, Options& o, bool with_method) {
  cmd->add_option("--task", o.task, "door | reach")->check(CLI::IsMember({"door", "reach"}));
  if (with_method)
    cmd->add_option("--method", o.method, "imagine2servo | rtvs-final | cam-axis")
        ->check(CLI::IsMember({"imagine2servo", "rtvs-final", "cam-axis"}));
  cmd->add_option("--trials", o.trials, "number of seeds")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "first scenario seed; trial i uses seed + i");
  cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--config", o.config, "JSON config; its values win over flags")->check(CLI::ExistingFile);
  cmd->add_option("--n", o.n, "oracle keyframe count");
  cmd->add_option("--flow", o.flow, "estimated | ground-truth")->check(CLI::IsMember({"estimated", "ground-truth"}));
  cmd->add_option("--depth", o.depth, "motion-flowdepth | flowdepth | ground-truth")
      ->check(CLI::IsMember({"motion-flowdepth", "flowdepth", "ground-truth"}));
  cmd->add_option("--goal-noise-t", o.noise_t, "oracle pose noise, m per axis")->check(CLI::NonNegativeNumber);
  cmd->add_option("--goal-noise-r-deg", o.noise_r_deg, "oracle rotation noise, degrees per axis")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"imagine-then-servo experiments on the built-in simulator"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-scenarios", "write scenario JSON files");
  gen->add_option("--task", o.task, "door | reach")->check(CLI::IsMember({"door", "reach"}));
  gen->add_option("--trials", o.trials, "number of scenarios")->check(CLI::PositiveNumber);
  gen->add_option("--seed", o.seed, "first seed");
  gen->add_option("--out", o.out, "output directory")->required();

  auto* run = app.add_subcommand("run", "run one method over a seed range");
  add_experiment_flags(run, o, true);

  auto* ablate = app.add_subcommand("ablate-n", "paired imagine2servo runs over oracle keyframe counts");
  add_experiment_flags(ablate, o, false);
  ablate->add_option("--n-values", o.n_values, "keyframe counts, e.g. 2,4,9")->delimiter(',');

  std::string log_path;
  auto* curves = app.add_subcommand("curves", "photometric-error and speed curves from a trajectory log");
  curves->add_option("--log", log_path, "JSON-lines trajectory log")->required()->check(CLI::ExistingFile);
  curves->add_option("--out", o.out, "output directory")->required();

  std::vector<std::string> csv_paths;
  auto* agg = app.add_subcommand("aggregate", "aggregate metrics from per-trial CSV files, one row per method");
  agg->add_option("csv", csv_paths, "trials.csv files")->required()->check(CLI::ExistingFile);
  agg->add_option("--out", o.out, "also write aggregate.csv here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto task = sim::task_from_string(o.task);
      for (int i = 0; i < o.trials; ++i) {
        const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(i);
        const auto sc = sim::make_scenario(task, seed);
        experiments::detail::write_file(fs::path(o.out) / (o.task + "_seed" + std::to_string(seed) + ".json"),
                                        sim::to_json(sc).dump(2) + "\n");
      }
      std::cerr << "wrote " << o.trials << " scenarios to " << o.out << '\n';
    } else if (*run) {
      const auto spec = build_spec(o);
      const auto result = experiments::run_experiment(spec);
      print_aggregate({result.metrics});
    } else if (*ablate) {
      const auto spec = build_spec(o);
      const auto table = experiments::ablate_n(spec, config_n_values(o));
      std::cout << experiments::kAblationCsvHeader << '\n';
      for (const auto& r : table) {
        const auto& m = r.metrics;
        std::printf("%d,%d,%d,%.6f\n", r.n, m.trials, m.successes, m.success_rate);
      }
    } else if (*curves) {
      std::ifstream is(log_path);
      if (!is) throw std::runtime_error("cannot open " + log_path);
      experiments::emit_curves(is, o.out);
      std::cerr << "wrote curves to " << o.out << '\n';
    } else if (*agg) {
      std::map<std::string, std::vector<experiments::TrialRow>> by_method;
      for (const auto& p : csv_paths) {
        std::ifstream is(p);
        if (!is) throw std::runtime_error("cannot open " + p);
        for (auto& r : experiments::read_trial_csv(is)) by_method[r.method].push_back(r);
      }
      std::vector<experiments::AggregateMetrics> rows;
      for (const auto& [method, trials] : by_method) rows.push_back(experiments::aggregate(trials, method));
      print_aggregate(rows);
      if (!o.out.empty()) {
        std::string csv = std::string(experiments::kAggregateCsvHeader) + "\n";
        for (const auto& m : rows) csv += experiments::to_csv(m) + "\n";
        experiments::detail::write_file(fs::path(o.out) / "aggregate.csv", csv);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "i2s: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
