#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace i2s {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Rigid transform camera-in-world: p_world = rotation * p_cam + translation.
struct Pose {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Quat& q, const Vec3& t) : rotation(q.normalized()), translation(t) {}

  static Pose identity() { return {}; }
  static Pose translate(double x, double y, double z) { return {Quat::Identity(), Vec3(x, y, z)}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Mat3 rotation_matrix() const { return rotation.toRotationMatrix(); }

  bool operator==(const Pose& o) const {
    return rotation.coeffs() == o.rotation.coeffs() && translation == o.translation;
  }
};

/// Camera-frame velocity [v; w]. Linear in m/s, angular in rad/s.
struct Twist {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  Twist() = default;
  Twist(const Vec3& v, const Vec3& w) : linear(v), angular(w) {}
  explicit Twist(const Vec6& xi) : linear(xi.head<3>()), angular(xi.tail<3>()) {}

  Vec6 vector() const {
    Vec6 xi;
    xi << linear, angular;
    return xi;
  }
  double magnitude() const { return std::sqrt(linear.squaredNorm() + angular.squaredNorm()); }
  bool finite() const { return linear.allFinite() && angular.allFinite(); }

  Twist operator*(double s) const { return {linear * s, angular * s}; }
  Twist operator-() const { return {-linear, -angular}; }
  bool operator==(const Twist& o) const { return linear == o.linear && angular == o.angular; }
};

inline Pose compose(const Pose& a, const Pose& b) {
  Quat q = a.rotation * b.rotation;
  q.normalize();
  return {q, a.rotation * b.translation + a.translation};
}

inline Pose inverse(const Pose& p) {
  const Quat qi = p.rotation.conjugate();
  return {qi, -(qi * p.translation)};
}

inline Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return s;
}

/// SE(3) exponential of a body-frame twist scaled by dt.
inline Pose se3_exp(const Twist& t, double dt) {
  const Vec3 w = t.angular * dt;
  const Vec3 v = t.linear * dt;
  const double theta = w.norm();
  const Mat3 W = skew(w);
  Mat3 V = Mat3::Identity();
  Quat q = Quat::Identity();
  if (theta < 1e-9) {
    // second-order series; exact to machine precision at this angle
    V += 0.5 * W;
    q = Quat(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z());
  } else {
    const double t2 = theta * theta;
    V += (1.0 - std::cos(theta)) / t2 * W + (theta - std::sin(theta)) / (t2 * theta) * W * W;
    q = Quat(Eigen::AngleAxisd(theta, w / theta));
  }
  return {q, V * v};
}

/// Executes a twist for dt seconds: right-multiplies the body-frame motion.
inline Pose integrate_twist(const Pose& p, const Twist& t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_twist: dt must be positive");
  return compose(p, se3_exp(t, dt));
}

struct PoseError {
  double translation = 0.0;  // meters
  double rotation = 0.0;     // quaternion-difference norm
};

/// Euclidean translation error and the sign-minimal quaternion difference norm.
inline PoseError pose_error(const Pose& a, const Pose& b) {
  const Eigen::Vector4d qa = a.rotation.coeffs();
  const Eigen::Vector4d qb = b.rotation.coeffs();
  return {(a.translation - b.translation).norm(), std::min((qa - qb).norm(), (qa + qb).norm())};
}

/// Weighted distance used to localize a pose on a keyframe path.
inline double pose_distance(const Pose& a, const Pose& b, double meters_per_radian = 1.0) {
  const double angle = a.rotation.angularDistance(b.rotation);
  return (a.translation - b.translation).norm() + meters_per_radian * angle;
}

/// Interpolates position linearly and orientation by slerp.
inline Pose interpolate(const Pose& a, const Pose& b, double s) {
  return {a.rotation.slerp(s, b.rotation), (1.0 - s) * a.translation + s * b.translation};
}

/// Rotation about the camera-frame axes, applied in z-y-x order (yaw about y, pitch about x, roll about z).
inline Quat camera_rotation(double yaw, double pitch, double roll) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitY()) * Eigen::AngleAxisd(pitch, Vec3::UnitX()) *
              Eigen::AngleAxisd(roll, Vec3::UnitZ()));
}

}  // namespace i2s
