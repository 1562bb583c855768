#pragma once

#include "i2s/core/geometry.hpp"
#include "i2s/core/image.hpp"
#include "i2s/ibvs/interaction.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace i2s::ibvs {

/// Raised when a flow field does not constrain the camera twist.
class DegenerateFlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Depth-from-flow-magnitude proxy: Z = clamp(alpha / (|F| + eps), z_min, z_max).
struct FlowDepthConfig {
  double alpha = 1.0;    // px * m
  double epsilon = 1e-3;  // px
  double z_min = 0.1;     // m
  double z_max = 10.0;    // m
};

/// Consecutive-frame variant (see MotionFlowDepth); shares the z_min/z_max clamp above.
struct MotionDepthConfig {
  double initial_depth = 2.0;  // m, before any motion has been observed
  double min_parallax = 0.3;   // px of translational image motion at unit depth needed to update a pixel
  double gain = 0.5;           // blend factor for new inverse-depth samples
  int pyramid_levels = 2;      // for the previous -> current flow
};

struct SolverConfig {
  double damping = 1e-3;
  double max_linear = 0.5;   // m/s
  double max_angular = 0.5;  // rad/s
  int stride = 4;
  double min_valid_fraction = 0.05;
  int trim_passes = 0;        // residual-based outlier rejection rounds; 0 is the plain solve
  double trim_factor = 3.0;   // times the median sample residual
  double trim_floor = 0.5;    // px
  FlowDepthConfig flow_depth;
  MotionDepthConfig motion_depth;

  void validate() const {
    if (!(damping >= 0.0)) throw std::invalid_argument("SolverConfig: damping must be >= 0");
    if (!(max_linear > 0.0 && max_angular > 0.0)) throw std::invalid_argument("SolverConfig: caps must be positive");
    if (stride < 1) throw std::invalid_argument("SolverConfig: stride must be >= 1");
    if (trim_passes < 0 || !(trim_factor > 1.0) || !(trim_floor >= 0.0))
      throw std::invalid_argument("SolverConfig: need trim_passes >= 0, trim_factor > 1, trim_floor >= 0");
    if (!(flow_depth.z_min > 0.0 && flow_depth.z_max > flow_depth.z_min))
      throw std::invalid_argument("SolverConfig: need 0 < z_min < z_max");
    if (!(flow_depth.alpha > 0.0 && flow_depth.epsilon > 0.0))
      throw std::invalid_argument("SolverConfig: flow-depth constants must be positive");
    const auto& md = motion_depth;
    if (!(md.initial_depth > 0.0 && md.min_parallax > 0.0 && md.gain > 0.0 && md.gain <= 1.0) || md.pyramid_levels < 1)
      throw std::invalid_argument("SolverConfig: invalid motion-depth settings");
  }
};

inline DepthMap flow_depth(const FlowField& flow, const SolverConfig& cfg) {
  const auto& fd = cfg.flow_depth;
  DepthMap depth(flow.width(), flow.height());
  for (int v = 0; v < flow.height(); ++v)
    for (int u = 0; u < flow.width(); ++u) {
      if (!flow.is_valid(u, v)) continue;
      depth.depths(u, v) = std::clamp(fd.alpha / (flow.vectors(u, v).norm() + fd.epsilon), fd.z_min, fd.z_max);
      depth.valid(u, v) = 1;
    }
  return depth;
}

/// Image motion in px per frame induced by a camera twist, at every pixel with valid depth.
inline FlowField predicted_flow(const Twist& twist, const DepthMap& depth, const Intrinsics& intr) {
  if (!twist.finite()) throw std::invalid_argument("predicted_flow: non-finite twist");
  require_same_size(depth.width(), depth.height(), intr.width, intr.height, "predicted_flow");
  const Vec6 xi = twist.vector();
  FlowField flow(intr.width, intr.height);
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u) {
      if (!depth.is_valid(u, v)) continue;
      const Vec2 xy = intr.normalize(u, v);
      const auto row = interaction_row(xy.x(), xy.y(), depth.depths(u, v));
      flow.vectors(u, v) = Vec2(intr.fx * row.x_row.dot(xi), intr.fy * row.y_row.dot(xi));
      flow.valid(u, v) = 1;
    }
  return flow;
}

/// Scales the whole twist down so both speed caps hold; direction is preserved.
inline Twist clamp_twist(const Twist& t, double max_linear, double max_angular) {
  double scale = 1.0;
  const double lin = t.linear.norm();
  const double ang = t.angular.norm();
  if (lin > max_linear) scale = std::min(scale, max_linear / lin);
  if (ang > max_angular) scale = std::min(scale, max_angular / ang);
  return t * scale;
}

/// Stacked interaction rows (pixel units) and target flow over the stride lattice.
struct FlowSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  std::size_t lattice = 0;  // pixels visited
  std::size_t used = 0;     // pixels with valid flow and depth
  std::vector<Vec2> points;  // normalized coordinates of the used pixels
};

inline FlowSystem build_system(const FlowField& target, const DepthMap& depth, const Intrinsics& intr, int stride) {
  require_same_size(target.width(), target.height(), intr.width, intr.height, "solve_velocity");
  require_same_size(depth.width(), depth.height(), intr.width, intr.height, "solve_velocity");
  std::vector<std::pair<int, int>> px;
  std::size_t lattice = 0;
  for (int v = 0; v < intr.height; v += stride)
    for (int u = 0; u < intr.width; u += stride) {
      ++lattice;
      if (target.is_valid(u, v) && depth.is_valid(u, v) && depth.depths(u, v) > 0.0) px.emplace_back(u, v);
    }
  FlowSystem sys;
  sys.lattice = lattice;
  sys.used = px.size();
  sys.a.resize(static_cast<Eigen::Index>(2 * px.size()), 6);
  sys.b.resize(static_cast<Eigen::Index>(2 * px.size()));
  sys.points.reserve(px.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto [u, v] = px[i];
    const Vec2 xy = intr.normalize(u, v);
    sys.points.push_back(xy);
    const auto row = interaction_row(xy.x(), xy.y(), depth.depths(u, v));
    const auto r = static_cast<Eigen::Index>(2 * i);
    sys.a.row(r) = intr.fx * row.x_row;
    sys.a.row(r + 1) = intr.fy * row.y_row;
    sys.b(r) = target.vectors(u, v).x();
    sys.b(r + 1) = target.vectors(u, v).y();
  }
  return sys;
}

namespace detail {

inline Vec6 solve_unclamped(const FlowSystem& sys, const SolverConfig& cfg) {
  if (sys.used < 3 || static_cast<double>(sys.used) < cfg.min_valid_fraction * static_cast<double>(sys.lattice))
    throw DegenerateFlowError("solve_velocity: too few valid flow samples");

  // sample locations must span the image plane, not a line
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : sys.points) centroid += p;
  centroid /= static_cast<double>(sys.used);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : sys.points) cov += (p - centroid) * (p - centroid).transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov / static_cast<double>(sys.used));
  if (eig.eigenvalues()(0) < 1e-12) throw DegenerateFlowError("solve_velocity: collinear flow samples");

  Eigen::MatrixXd a = sys.a;
  Eigen::VectorXd b = sys.b;
  if (cfg.damping > 0.0) {
    a.conservativeResize(a.rows() + 6, Eigen::NoChange);
    b.conservativeResize(b.rows() + 6);
    a.bottomRows(6) = std::sqrt(cfg.damping) * Eigen::Matrix<double, 6, 6>::Identity();
    b.tail(6).setZero();
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 6) throw DegenerateFlowError("solve_velocity: rank-deficient interaction stack");
  const Vec6 xi = qr.solve(b);
  if (!xi.allFinite()) throw DegenerateFlowError("solve_velocity: non-finite solution");
  return xi;
}

/// Keeps the rows whose sample residual is at most `limit` px.
inline FlowSystem keep_inliers(const FlowSystem& sys, const Vec6& xi, double limit) {
  const Eigen::VectorXd r = sys.a * xi - sys.b;
  FlowSystem out;
  out.lattice = sys.lattice;
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < sys.used; ++i) {
    const auto k = static_cast<Eigen::Index>(2 * i);
    if (std::hypot(r(k), r(k + 1)) <= limit) keep.push_back(static_cast<Eigen::Index>(i));
  }
  out.used = keep.size();
  out.a.resize(static_cast<Eigen::Index>(2 * keep.size()), 6);
  out.b.resize(static_cast<Eigen::Index>(2 * keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const auto src = 2 * keep[j];
    const auto dst = static_cast<Eigen::Index>(2 * j);
    out.a.middleRows(dst, 2) = sys.a.middleRows(src, 2);
    out.b.segment(dst, 2) = sys.b.segment(src, 2);
    out.points.push_back(sys.points[static_cast<std::size_t>(keep[j])]);
  }
  return out;
}

}  // namespace detail

/// argmin ||A t - f||^2 + damping ||t||^2 over the stride lattice, then clamped to the speed caps.
/// With trim_passes > 0 the solve is repeated on the samples whose residual is within
/// trim_factor times the median residual (never below trim_floor px).
inline Twist solve_velocity(const FlowField& target, const DepthMap& depth, const Intrinsics& intr,
                            const SolverConfig& cfg) {
  cfg.validate();
  FlowSystem sys = build_system(target, depth, intr, cfg.stride);
  Vec6 xi = detail::solve_unclamped(sys, cfg);
  for (int pass = 0; pass < cfg.trim_passes; ++pass) {
    const Eigen::VectorXd r = sys.a * xi - sys.b;
    std::vector<double> norms(sys.used);
    for (std::size_t i = 0; i < sys.used; ++i) {
      const auto k = static_cast<Eigen::Index>(2 * i);
      norms[i] = std::hypot(r(k), r(k + 1));
    }
    std::nth_element(norms.begin(), norms.begin() + static_cast<std::ptrdiff_t>(norms.size() / 2), norms.end());
    const double limit = std::max(cfg.trim_factor * norms[norms.size() / 2], cfg.trim_floor);
    FlowSystem kept = detail::keep_inliers(sys, xi, limit);
    if (kept.used == sys.used) break;
    try {
      xi = detail::solve_unclamped(kept, cfg);
    } catch (const DegenerateFlowError&) {
      break;  // too aggressive; keep the previous estimate
    }
    sys = std::move(kept);
  }
  return clamp_twist(Twist(xi), cfg.max_linear, cfg.max_angular);
}

}  // namespace i2s::ibvs
