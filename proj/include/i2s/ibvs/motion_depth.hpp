#pragma once

#include "i2s/core/geometry.hpp"
#include "i2s/core/image.hpp"
#include "i2s/ibvs/interaction.hpp"
#include "i2s/ibvs/solver.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace i2s::ibvs {

/// Flow-depth from consecutive frames: the flow between the previous and the current view, with
/// the rotational part of the executed twist removed, is compared against the flow the executed
/// translation would induce at unit depth. The ratio is an inverse-depth sample; samples are
/// blended into a running map so depth survives slow, near-converged steps.
class MotionFlowDepth {
 public:
  explicit MotionFlowDepth(const SolverConfig& cfg) : cfg_(cfg) { cfg.validate(); }

  void reset() { inv_depth_.clear(); }

  /// `flow` is previous -> current (px), produced by `executed` applied for `dt` seconds.
  void update(const FlowField& flow, const Twist& executed, double dt, const Intrinsics& intr) {
    require_same_size(flow.width(), flow.height(), intr.width, intr.height, "MotionFlowDepth::update");
    ensure(intr.width, intr.height);
    const auto& md = cfg_.motion_depth;
    const auto& fd = cfg_.flow_depth;
    Vec6 trans = Vec6::Zero(), rot = Vec6::Zero();
    trans.head<3>() = executed.linear * dt;
    rot.tail<3>() = executed.angular * dt;
    for (int v = 0; v < flow.height(); ++v)
      for (int u = 0; u < flow.width(); ++u) {
        if (!flow.is_valid(u, v)) continue;
        const Vec2 xy = intr.normalize(u, v);
        const auto row = interaction_row(xy.x(), xy.y(), 1.0);
        const Vec2 unit(intr.fx * row.x_row.dot(trans), intr.fy * row.y_row.dot(trans));
        const double parallax = unit.norm();
        if (parallax < md.min_parallax) continue;
        const Vec2 spin(intr.fx * row.x_row.dot(rot), intr.fy * row.y_row.dot(rot));
        const double sample =
            std::clamp((flow.vectors(u, v) - spin).norm() / parallax, 1.0 / fd.z_max, 1.0 / fd.z_min);
        double& q = inv_depth_[static_cast<std::size_t>(v) * width_ + u];
        q += md.gain * (sample - q);
      }
  }

  DepthMap depth(int width, int height) {
    ensure(width, height);
    DepthMap out(width, height);
    for (int v = 0; v < height; ++v)
      for (int u = 0; u < width; ++u) {
        out.depths(u, v) = 1.0 / inv_depth_[static_cast<std::size_t>(v) * width_ + u];
        out.valid(u, v) = 1;
      }
    return out;
  }

 private:
  void ensure(int width, int height) {
    if (!inv_depth_.empty() && width == width_ && height == height_) return;
    width_ = width;
    height_ = height;
    inv_depth_.assign(static_cast<std::size_t>(width) * height, 1.0 / cfg_.motion_depth.initial_depth);
  }

  SolverConfig cfg_;
  int width_ = 0, height_ = 0;
  std::vector<double> inv_depth_;
};

}  // namespace i2s::ibvs
