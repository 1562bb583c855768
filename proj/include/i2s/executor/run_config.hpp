#pragma once

#include "i2s/flow/lucas_kanade.hpp"
#include "i2s/foresight/foresight.hpp"
#include "i2s/ibvs/motion_depth.hpp"
#include "i2s/ibvs/solver.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace i2s::executor {

enum class FlowSource { estimated, ground_truth };
enum class DepthSource { flowdepth, motion_flowdepth, ground_truth };

/// Photometric thresholds are mean absolute differences on the 0-255 scale.
struct RunConfig {
  double eps_p = 1.0;    // outer loop: consecutive sub-goals considered identical below this
  double eps_phi = 2.0;  // inner loop: sub-goal reached below this
  double dt = 0.05;      // seconds per control step
  int max_inner_steps = 150;
  int max_total_steps = 2000;
  FlowSource flow_source = FlowSource::estimated;
  DepthSource depth_source = DepthSource::flowdepth;
  ibvs::SolverConfig solver;
  foresight::OracleConfig oracle;
  flow::FlowEstimatorConfig estimator;

  void validate() const {
    if (!(eps_p > 0.0 && eps_phi > 0.0)) throw std::invalid_argument("RunConfig: thresholds must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("RunConfig: dt must be positive");
    if (max_inner_steps <= 0 || max_total_steps <= 0) throw std::invalid_argument("RunConfig: step limits must be positive");
    solver.validate();
    oracle.validate();
    estimator.validate();
  }
};

/// Defaults tuned for the built-in simulator with estimated flow and the flow-depth proxy.
inline RunConfig default_run_config() {
  RunConfig cfg;
  cfg.solver.flow_depth.alpha = 30.0;
  cfg.solver.trim_passes = 2;
  cfg.depth_source = DepthSource::motion_flowdepth;
  return cfg;
}

inline RunConfig ground_truth_run_config() {
  RunConfig cfg = default_run_config();
  cfg.flow_source = FlowSource::ground_truth;
  cfg.depth_source = DepthSource::ground_truth;
  return cfg;
}

inline const char* to_string(FlowSource s) { return s == FlowSource::estimated ? "estimated" : "ground-truth"; }
inline const char* to_string(DepthSource s) {
  switch (s) {
    case DepthSource::flowdepth: return "flowdepth";
    case DepthSource::motion_flowdepth: return "motion-flowdepth";
    case DepthSource::ground_truth: return "ground-truth";
  }
  return "?";
}

inline FlowSource flow_source_from_string(const std::string& s) {
  if (s == "estimated") return FlowSource::estimated;
  if (s == "ground-truth") return FlowSource::ground_truth;
  throw std::invalid_argument("unknown flow source '" + s + "'");
}

inline DepthSource depth_source_from_string(const std::string& s) {
  if (s == "flowdepth") return DepthSource::flowdepth;
  if (s == "motion-flowdepth") return DepthSource::motion_flowdepth;
  if (s == "ground-truth") return DepthSource::ground_truth;
  throw std::invalid_argument("unknown depth source '" + s + "'");
}

inline nlohmann::json to_json(const RunConfig& c) {
  const auto& s = c.solver;
  const auto& o = c.oracle;
  const auto& e = c.estimator;
  return {
      {"eps_p", c.eps_p},
      {"eps_phi", c.eps_phi},
      {"dt", c.dt},
      {"max_inner_steps", c.max_inner_steps},
      {"max_total_steps", c.max_total_steps},
      {"flow_source", to_string(c.flow_source)},
      {"depth_source", to_string(c.depth_source)},
      {"solver",
       {{"damping", s.damping},
        {"max_linear", s.max_linear},
        {"max_angular", s.max_angular},
        {"stride", s.stride},
        {"min_valid_fraction", s.min_valid_fraction},
        {"trim_passes", s.trim_passes},
        {"trim_factor", s.trim_factor},
        {"trim_floor", s.trim_floor},
        {"flow_depth",
         {{"alpha", s.flow_depth.alpha},
          {"epsilon", s.flow_depth.epsilon},
          {"z_min", s.flow_depth.z_min},
          {"z_max", s.flow_depth.z_max}}},
        {"motion_depth",
         {{"initial_depth", s.motion_depth.initial_depth},
          {"min_parallax", s.motion_depth.min_parallax},
          {"gain", s.motion_depth.gain},
          {"pyramid_levels", s.motion_depth.pyramid_levels}}}}},
      {"oracle",
       {{"n", o.n},
        {"noise_seed", o.noise_seed},
        {"goal_noise", {{"sigma_t", o.noise.sigma_t}, {"sigma_r", o.noise.sigma_r}, {"sigma_px", o.noise.sigma_px}}}}},
      {"estimator",
       {{"pyramid_levels", e.pyramid_levels},
        {"window", e.window},
        {"iterations", e.iterations},
        {"min_eigenvalue", e.min_eigenvalue},
        {"max_fb_error", e.max_fb_error}}},
  };
}

namespace detail {
template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
}  // namespace detail

/// Overlays the fields present in j onto base; unknown keys are rejected.
inline RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = default_run_config()) {
  static const char* kTop[] = {"eps_p", "eps_phi", "dt", "max_inner_steps", "max_total_steps", "flow_source",
                               "depth_source", "solver", "oracle", "estimator"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kTop), std::end(kTop), key) == std::end(kTop))
      throw std::invalid_argument("run config: unknown key '" + key + "'");
  }
  using detail::maybe;
  maybe(j, "eps_p", base.eps_p);
  maybe(j, "eps_phi", base.eps_phi);
  maybe(j, "dt", base.dt);
  maybe(j, "max_inner_steps", base.max_inner_steps);
  maybe(j, "max_total_steps", base.max_total_steps);
  if (j.contains("flow_source")) base.flow_source = flow_source_from_string(j.at("flow_source").get<std::string>());
  if (j.contains("depth_source")) base.depth_source = depth_source_from_string(j.at("depth_source").get<std::string>());
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    maybe(s, "damping", base.solver.damping);
    maybe(s, "max_linear", base.solver.max_linear);
    maybe(s, "max_angular", base.solver.max_angular);
    maybe(s, "stride", base.solver.stride);
    maybe(s, "min_valid_fraction", base.solver.min_valid_fraction);
    maybe(s, "trim_passes", base.solver.trim_passes);
    maybe(s, "trim_factor", base.solver.trim_factor);
    maybe(s, "trim_floor", base.solver.trim_floor);
    if (s.contains("flow_depth")) {
      const auto& f = s.at("flow_depth");
      maybe(f, "alpha", base.solver.flow_depth.alpha);
      maybe(f, "epsilon", base.solver.flow_depth.epsilon);
      maybe(f, "z_min", base.solver.flow_depth.z_min);
      maybe(f, "z_max", base.solver.flow_depth.z_max);
    }
    if (s.contains("motion_depth")) {
      const auto& m = s.at("motion_depth");
      maybe(m, "initial_depth", base.solver.motion_depth.initial_depth);
      maybe(m, "min_parallax", base.solver.motion_depth.min_parallax);
      maybe(m, "gain", base.solver.motion_depth.gain);
      maybe(m, "pyramid_levels", base.solver.motion_depth.pyramid_levels);
    }
  }
  if (j.contains("oracle")) {
    const auto& o = j.at("oracle");
    maybe(o, "n", base.oracle.n);
    maybe(o, "noise_seed", base.oracle.noise_seed);
    if (o.contains("goal_noise")) {
      const auto& g = o.at("goal_noise");
      maybe(g, "sigma_t", base.oracle.noise.sigma_t);
      maybe(g, "sigma_r", base.oracle.noise.sigma_r);
      maybe(g, "sigma_px", base.oracle.noise.sigma_px);
    }
  }
  if (j.contains("estimator")) {
    const auto& e = j.at("estimator");
    maybe(e, "pyramid_levels", base.estimator.pyramid_levels);
    maybe(e, "window", base.estimator.window);
    maybe(e, "iterations", base.estimator.iterations);
    maybe(e, "min_eigenvalue", base.estimator.min_eigenvalue);
    maybe(e, "max_fb_error", base.estimator.max_fb_error);
  }
  base.validate();
  return base;
}

}  // namespace i2s::executor
