#pragma once

#include "i2s/core/geometry.hpp"
#include "i2s/executor/run_config.hpp"
#include "i2s/flow/lucas_kanade.hpp"
#include "i2s/flow/photometric.hpp"
#include "i2s/foresight/foresight.hpp"
#include "i2s/ibvs/motion_depth.hpp"
#include "i2s/ibvs/solver.hpp"
#include "i2s/sim/scenario.hpp"
#include "i2s/sim/scene.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace i2s::executor {

enum class Outcome { success, collision, timeout, degenerate_flow };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::collision: return "collision";
    case Outcome::timeout: return "timeout";
    case Outcome::degenerate_flow: return "degenerate-flow";
  }
  return "?";
}

inline Outcome outcome_from_string(const std::string& s) {
  if (s == "success") return Outcome::success;
  if (s == "collision") return Outcome::collision;
  if (s == "timeout") return Outcome::timeout;
  if (s == "degenerate-flow") return Outcome::degenerate_flow;
  throw std::invalid_argument("unknown outcome '" + s + "'");
}

/// One executed twist.
struct StepRecord {
  int step = 0;
  Pose pose;  // after the step
  Twist twist;
  double photometric_error = 0.0;  // to the active sub-goal, after the step
  int subgoal = 0;                 // outer-loop sub-goal counter
  bool collision = false;
};

struct TrialResult {
  Outcome outcome = Outcome::timeout;
  double trans_err = 0.0;  // m, final pose vs. the scenario goal
  double rot_err = 0.0;    // quaternion-difference norm
  int steps = 0;
  int subgoals = 0;
  std::vector<StepRecord> records;
};

/// Mutable state of one trial: the simulated camera and everything logged so far.
class TrialState {
 public:
  TrialState(const sim::Scenario& scenario, const RunConfig& cfg)
      : scenario_(scenario), cfg_(cfg), scene_(scenario.scene()), pose_(scenario.start) {
    scenario.validate();
    cfg.validate();
    view_ = sim::render(scene_, pose_, scenario.intrinsics);
    collided_ = sim::check_collision(scene_, scenario.body, pose_);
  }

  const sim::Scenario& scenario() const { return scenario_; }
  const sim::Scene& scene() const { return scene_; }
  const RunConfig& config() const { return cfg_; }
  const Pose& pose() const { return pose_; }
  const sim::Render& view() const { return view_; }
  const ImageBuffer& previous_image() const { return previous_image_; }  // view before the last step
  const std::vector<StepRecord>& records() const { return records_; }
  int steps() const { return static_cast<int>(records_.size()); }
  int subgoal_index() const { return subgoal_; }
  void next_subgoal_index() { ++subgoal_; }

  bool collided() const { return collided_; }
  bool degenerate() const { return degenerate_; }
  void mark_degenerate() { degenerate_ = true; }
  bool budget_exhausted() const { return steps() >= cfg_.max_total_steps; }
  bool halted() const { return collided_ || degenerate_ || budget_exhausted(); }

  /// Executes one twist for dt, re-renders, checks collision and logs the step.
  void execute(const Twist& commanded, const ImageBuffer& subgoal) {
    const Twist twist = ibvs::clamp_twist(commanded, cfg_.solver.max_linear, cfg_.solver.max_angular);
    const Pose next = integrate_twist(pose_, twist, cfg_.dt);
    if (scenario_.door_quad) {
      const auto c = sim::door_crossing(scene_, *scenario_.door_quad, pose_.translation, next.translation);
      if (c.crossed && !c.inside_aperture) crossed_outside_ = true;
    }
    pose_ = next;
    previous_image_ = std::move(view_.image);
    view_ = sim::render(scene_, pose_, scenario_.intrinsics);
    collided_ = sim::check_collision(scene_, scenario_.body, pose_);
    records_.push_back({steps(), pose_, twist, flow::photometric_error(subgoal, view_.image), subgoal_, collided_});
  }

  TrialResult finish() const {
    TrialResult r;
    const auto err = pose_error(pose_, scenario_.goal());
    r.trans_err = err.translation;
    r.rot_err = err.rotation;
    r.steps = steps();
    r.subgoals = subgoal_ + 1;
    r.records = records_;
    if (collided_) r.outcome = Outcome::collision;
    else if (degenerate_) r.outcome = Outcome::degenerate_flow;
    else if (task_succeeded(err)) r.outcome = Outcome::success;
    else r.outcome = Outcome::timeout;
    return r;
  }

 private:
  bool task_succeeded(const PoseError& err) const {
    if (scenario_.task == sim::Task::reach) return err.translation < 0.03 && err.rotation < 0.03;
    // door: on the goal's side of the door plane, having passed the plane only through the aperture
    const int door = scenario_.door_quad.value_or(-1);
    if (door < 0) return false;
    const double goal_side = scene_.local_coords(door, scenario_.goal().translation)[2];
    const double here = scene_.local_coords(door, pose_.translation)[2];
    return !crossed_outside_ && (goal_side > 0.0) == (here > 0.0);
  }

  const sim::Scenario& scenario_;
  RunConfig cfg_;
  sim::Scene scene_;
  Pose pose_;
  sim::Render view_;
  ImageBuffer previous_image_;
  std::vector<StepRecord> records_;
  int subgoal_ = 0;
  bool collided_ = false;
  bool degenerate_ = false;
  bool crossed_outside_ = false;
};

/// Inner-loop policy: current view and sub-goal in, camera twist out.
class ServoController {
 public:
  virtual ~ServoController() = default;
  virtual Twist command(const TrialState& state, const foresight::Subgoal& goal) = 0;
};

/// Flow-driven IBVS: target flow (estimated or exact), depth (a flow proxy or exact), damped solve.
/// Holds the running consecutive-frame depth map; it restarts whenever a trial starts.
class FlowServoController : public ServoController {
 public:
  explicit FlowServoController(const RunConfig& cfg) : cfg_(cfg), motion_depth_(cfg.solver) { cfg.validate(); }

  Twist command(const TrialState& state, const foresight::Subgoal& goal) override {
    const auto& intr = state.scenario().intrinsics;
    flow::FlowEstimatorConfig est = cfg_.estimator;
    est.stride = cfg_.solver.stride;
    FlowField target;
    if (cfg_.flow_source == FlowSource::ground_truth) {
      if (!goal.pose) throw std::invalid_argument("ground-truth flow needs a sub-goal with a known pose");
      target = sim::ground_truth_flow(state.scene(), state.pose(), *goal.pose, intr, 1e-3, cfg_.solver.stride);
    } else {
      target = flow::estimate_flow(state.view().image, goal.image, est);
    }
    DepthMap depth;
    switch (cfg_.depth_source) {
      case DepthSource::ground_truth: depth = state.view().depth; break;
      case DepthSource::flowdepth: depth = ibvs::flow_depth(target, cfg_.solver); break;
      case DepthSource::motion_flowdepth: depth = motion_depth(state, est); break;
    }
    return ibvs::solve_velocity(target, depth, intr, cfg_.solver);
  }

 private:
  DepthMap motion_depth(const TrialState& state, flow::FlowEstimatorConfig est) {
    const auto& intr = state.scenario().intrinsics;
    if (state.steps() == 0) {
      motion_depth_.reset();
    } else if (state.steps() != seen_steps_) {
      // consecutive frames move a few pixels at most, so a shallow pyramid without the
      // forward-backward pass is enough
      est.pyramid_levels = cfg_.solver.motion_depth.pyramid_levels;
      est.max_fb_error = std::numeric_limits<double>::infinity();
      const FlowField motion = flow::estimate_flow(state.previous_image(), state.view().image, est);
      motion_depth_.update(motion, state.records().back().twist, cfg_.dt, intr);
    }
    seen_steps_ = state.steps();
    return motion_depth_.depth(intr.width, intr.height);
  }

  RunConfig cfg_;
  ibvs::MotionFlowDepth motion_depth_;
  int seen_steps_ = -1;
};

struct InnerResult {
  bool converged = false;
  int steps = 0;
};

/// Servo toward one sub-goal while its photometric error is >= eps_phi, for at most max_steps.
/// Stops early when the trial halts (collision, degenerate flow, total budget).
inline InnerResult inner_servo(const foresight::Subgoal& goal, TrialState& state, ServoController& controller,
                               int max_steps) {
  InnerResult r;
  double err = flow::photometric_error(goal.image, state.view().image);
  while (err >= state.config().eps_phi) {
    if (r.steps >= max_steps || state.halted()) return r;
    Twist twist;
    try {
      twist = controller.command(state, goal);
    } catch (const ibvs::DegenerateFlowError&) {
      state.mark_degenerate();
      return r;
    }
    state.execute(twist, goal.image);
    ++r.steps;
    err = state.records().back().photometric_error;
    if (state.collided()) return r;
  }
  r.converged = true;
  return r;
}

inline foresight::ForesightRequest make_request(const TrialState& state) {
  foresight::ForesightRequest req;
  req.current = state.view().image;
  req.prompt = state.scenario().prompt;
  req.camera_pose = state.pose();
  return req;
}

/// Imagine-then-servo: sample a sub-goal, servo to it, resample; stop once a converged inner
/// loop is followed by a sub-goal identical (below eps_p) to the previous one.
inline TrialResult run_trial(const sim::Scenario& scenario, const RunConfig& cfg, foresight::Foresight& foresight,
                             ServoController& controller) {
  TrialState state(scenario, cfg);
  if (state.collided()) return state.finish();
  foresight::Subgoal goal = foresight.next_subgoal(make_request(state));
  while (!state.halted()) {
    const ImageBuffer last = goal.image;
    const InnerResult inner = inner_servo(goal, state, controller, cfg.max_inner_steps);
    if (state.halted()) break;
    goal = foresight.next_subgoal(make_request(state));
    const double dist = flow::photometric_error(last, goal.image);
    if (dist >= cfg.eps_p) state.next_subgoal_index();
    else if (inner.converged) break;
  }
  return state.finish();
}

/// Single-goal servoing straight to the (unperturbed) final keyframe render.
inline TrialResult run_final_image_servo(const sim::Scenario& scenario, const RunConfig& cfg,
                                         ServoController& controller) {
  TrialState state(scenario, cfg);
  if (state.collided()) return state.finish();
  const sim::Render final_view = sim::render(state.scene(), scenario.goal(), scenario.intrinsics);
  const foresight::Subgoal goal{final_view.image, scenario.goal(), static_cast<int>(scenario.keyframes.size()) - 1};
  inner_servo(goal, state, controller, cfg.max_total_steps);
  return state.finish();
}

/// Constant forward motion along the initial optical axis, up to the point of closest approach
/// to the goal position.
inline TrialResult run_camera_axis(const sim::Scenario& scenario, const RunConfig& cfg) {
  TrialState state(scenario, cfg);
  if (state.collided()) return state.finish();
  const Vec3 axis = scenario.start.rotation * Vec3::UnitZ();
  const double reach = axis.dot(scenario.goal().translation - scenario.start.translation);
  const double speed = cfg.solver.max_linear;
  const Twist forward(Vec3(0.0, 0.0, speed), Vec3::Zero());
  const sim::Render final_view = sim::render(state.scene(), scenario.goal(), scenario.intrinsics);
  double travelled = 0.0;
  while (!state.halted() && travelled + 1e-12 < reach) {
    const double step = std::min(speed * cfg.dt, reach - travelled);
    state.execute(forward * (step / (speed * cfg.dt)), final_view.image);
    travelled += step;
  }
  return state.finish();
}

}  // namespace i2s::executor
