#pragma once

#include "i2s/core/geometry.hpp"
#include "i2s/core/image.hpp"
#include "i2s/core/random.hpp"
#include "i2s/flow/photometric.hpp"
#include "i2s/sim/scenario.hpp"
#include "i2s/sim/scene.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace i2s::foresight {

struct ForesightRequest {
  ImageBuffer current;
  std::string prompt;
  std::optional<ImageBuffer> aux;  // e.g. an overhead view
  // Simulator state. Oracles with privileged access may use it; it never goes over the wire.
  std::optional<Pose> camera_pose;

  void validate() const {
    if (prompt.empty()) throw std::invalid_argument("ForesightRequest: prompt must be nonempty");
  }
};

struct Subgoal {
  ImageBuffer image;
  std::optional<Pose> pose;       // camera pose the image was rendered from, when known
  std::optional<int> keyframe;    // index on the oracle's trajectory, when known
};

/// Sub-goal generator p(I_g | I_t, P).
class Foresight {
 public:
  virtual ~Foresight() = default;
  virtual Subgoal next_subgoal(const ForesightRequest& req) = 0;
};

struct GoalNoise {
  double sigma_t = 0.0;   // m, per axis
  double sigma_r = 0.0;   // rad, per axis
  double sigma_px = 0.0;  // intensity noise, 0-255 units
};

struct OracleConfig {
  int n = 9;
  GoalNoise noise;
  std::uint64_t noise_seed = 0;

  void validate() const {
    if (n < 2) throw std::invalid_argument("OracleConfig: n must be >= 2");
    if (!(noise.sigma_t >= 0.0 && noise.sigma_r >= 0.0 && noise.sigma_px >= 0.0))
      throw std::invalid_argument("OracleConfig: noise sigmas must be >= 0");
  }
};

/// Nearest keyframe by translation + 1 m/rad * rotation angle; ties go to the larger index.
inline int oracle_progress(const Pose& current, const std::vector<Pose>& trajectory) {
  if (trajectory.empty()) throw std::invalid_argument("oracle_progress: empty trajectory");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const double d = pose_distance(current, trajectory[i], 1.0);
    if (d <= best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

/// Strict: goals count as the same only when their photometric error is below eps_p.
inline bool goal_converged(const ImageBuffer& last_goal, const ImageBuffer& new_goal, double eps_p) {
  return flow::photometric_error(last_goal, new_goal) < eps_p;
}

/// Keyframe oracle: renders of n uniformly resampled reference-trajectory poses. A request at
/// keyframe k yields keyframe k+1 (the final keyframe is a fixed point). Noise is a fixed draw
/// per keyframe, so repeated requests for the same keyframe return identical images.
class KeyframeOracle : public Foresight {
 public:
  KeyframeOracle(const sim::Scenario& scenario, const OracleConfig& cfg)
      : cfg_(cfg), prompt_(scenario.prompt) {
    cfg.validate();
    scenario.validate();
    trajectory_ = sim::resample_path(scenario.keyframes, cfg.n);
    const sim::Scene scene = scenario.scene();
    for (std::size_t k = 0; k < trajectory_.size(); ++k) {
      Rng rng(derive_seed(cfg.noise_seed ^ scenario.seed, 1000 + k));
      Pose pose = trajectory_[k];
      const auto& nz = cfg.noise;
      if (nz.sigma_t > 0.0 || nz.sigma_r > 0.0) {
        const Vec3 dt(rng.normal(), rng.normal(), rng.normal());
        const Vec3 dr(rng.normal(), rng.normal(), rng.normal());
        pose.translation += nz.sigma_t * dt;
        const Vec3 w = nz.sigma_r * dr;
        if (w.norm() > 0.0) pose.rotation = (pose.rotation * Quat(Eigen::AngleAxisd(w.norm(), w.normalized()))).normalized();
      }
      ImageBuffer img = sim::render(scene, pose, scenario.intrinsics).image;
      if (nz.sigma_px > 0.0)
        for (auto& p : img.pixels.data()) p = quantize8(p + nz.sigma_px / 255.0 * rng.normal());
      goal_poses_.push_back(pose);
      renders_.push_back(std::move(img));
    }
  }

  Subgoal next_subgoal(const ForesightRequest& req) override {
    req.validate();
    if (req.prompt != prompt_) throw std::invalid_argument("KeyframeOracle: unknown task prompt '" + req.prompt + "'");
    const int k = req.camera_pose ? oracle_progress(*req.camera_pose, trajectory_) : localize(req.current);
    const int target = std::min(k + 1, static_cast<int>(trajectory_.size()) - 1);
    return subgoal(target);
  }

  /// Image-only localization: keyframe render with the lowest photometric error (ties to the larger index).
  int localize(const ImageBuffer& current) const {
    int best = 0;
    double best_e = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < renders_.size(); ++i) {
      const double e = flow::photometric_error(current, renders_[i]);
      if (e <= best_e) {
        best_e = e;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  Subgoal subgoal(int k) const {
    const auto i = static_cast<std::size_t>(k);
    return {renders_.at(i), goal_poses_.at(i), k};
  }

  const std::vector<Pose>& trajectory() const { return trajectory_; }
  const OracleConfig& config() const { return cfg_; }
  const std::string& prompt() const { return prompt_; }
  const Intrinsics& intrinsics() const { return renders_.front().intrinsics; }

 private:
  OracleConfig cfg_;
  std::string prompt_;
  std::vector<Pose> trajectory_;
  std::vector<Pose> goal_poses_;
  std::vector<ImageBuffer> renders_;
};

}  // namespace i2s::foresight
