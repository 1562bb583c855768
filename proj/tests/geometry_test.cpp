#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace i2s;

namespace {

constexpr double kPi = std::numbers::pi;

// Power series of the 4x4 se(3) matrix; independent of the closed form in se3_exp.
Eigen::Matrix4d expm_series(const Twist& t, double dt) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = skew(t.angular * dt);
  m.topRightCorner<3, 1>() = t.linear * dt;
  Eigen::Matrix4d term = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d sum = Eigen::Matrix4d::Identity();
  for (int k = 1; k < 60; ++k) {
    term = term * m / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

Pose random_pose(Rng& rng) {
  const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
  return {Quat(Eigen::AngleAxisd(rng.uniform(-kPi, kPi), axis)),
          Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3))};
}

}  // namespace

TEST(Compose, IdentityIsNeutral) {
  Rng rng(1);
  const Pose p = random_pose(rng);
  const Pose q = compose(Pose::identity(), p);
  EXPECT_LT(pose_error(p, q).translation, 1e-12);
  EXPECT_LT(pose_error(p, q).rotation, 1e-12);
}

TEST(Compose, InverseGivesIdentity) {
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const Pose p = random_pose(rng);
    const Pose e = compose(p, inverse(p));
    EXPECT_LT(e.translation.norm(), 1e-9);
    EXPECT_LT(e.rotation.angularDistance(Quat::Identity()), 1e-9);
    EXPECT_NEAR(e.rotation.norm(), 1.0, 1e-9);
  }
}

TEST(Compose, PureTranslationsAdd) {
  const Pose p = compose(Pose::translate(1, 0, 0), Pose::translate(0, 2, 0));
  EXPECT_TRUE(p.translation.isApprox(Vec3(1, 2, 0)));
  EXPECT_LT(p.rotation.angularDistance(Quat::Identity()), 1e-15);
}

TEST(IntegrateTwist, ZeroTwistKeepsPose) {
  const Pose p = integrate_twist(Pose::identity(), Twist(), 0.1);
  EXPECT_EQ(p.translation, Vec3::Zero());
  EXPECT_LT(p.rotation.angularDistance(Quat::Identity()), 1e-15);
}

TEST(IntegrateTwist, ForwardTranslation) {
  const Pose p = integrate_twist(Pose::identity(), Twist(Vec3(0, 0, 1), Vec3::Zero()), 0.5);
  EXPECT_TRUE(p.translation.isApprox(Vec3(0, 0, 0.5), 1e-15));
}

TEST(IntegrateTwist, HalfTurnAboutOpticalAxisMatchesMatrixExponential) {
  const Twist t(Vec3::Zero(), Vec3(0, 0, kPi));
  const Pose p = integrate_twist(Pose::identity(), t, 1.0);
  const Eigen::Matrix4d ref = expm_series(t, 1.0);
  EXPECT_LT((p.rotation_matrix() - ref.topLeftCorner<3, 3>()).norm(), 1e-9);
  EXPECT_LT(p.translation.norm(), 1e-12);
  EXPECT_NEAR(p.rotation.angularDistance(Quat::Identity()), kPi, 1e-9);
}

TEST(IntegrateTwist, RandomTwistsMatchMatrixExponential) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Twist t(Vec3(rng.normal(), rng.normal(), rng.normal()), Vec3(rng.normal(), rng.normal(), rng.normal()));
    const double dt = rng.uniform(0.01, 1.0);
    const Pose p = se3_exp(t, dt);
    const Eigen::Matrix4d ref = expm_series(t, dt);
    EXPECT_LT((p.rotation_matrix() - ref.topLeftCorner<3, 3>()).norm(), 1e-9);
    EXPECT_LT((p.translation - ref.topRightCorner<3, 1>()).norm(), 1e-9);
  }
}

TEST(IntegrateTwist, TinyRotationUsesSeriesBranch) {
  const Twist t(Vec3(0.3, -0.1, 0.2), Vec3(1e-11, -2e-11, 3e-11));
  const Pose p = se3_exp(t, 1.0);
  const Eigen::Matrix4d ref = expm_series(t, 1.0);
  EXPECT_LT((p.translation - ref.topRightCorner<3, 1>()).norm(), 1e-14);
  EXPECT_LT((p.rotation_matrix() - ref.topLeftCorner<3, 3>()).norm(), 1e-14);
}

TEST(IntegrateTwist, ForwardThenBackwardReturns) {
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const Pose p = random_pose(rng);
    const Twist t(Vec3(rng.normal(), rng.normal(), rng.normal()), Vec3(rng.normal(), rng.normal(), rng.normal()));
    const Pose back = integrate_twist(integrate_twist(p, t, 0.2), -t, 0.2);
    EXPECT_LT(pose_error(p, back).translation, 1e-9);
    EXPECT_LT(pose_error(p, back).rotation, 1e-9);
  }
}

TEST(IntegrateTwist, RejectsNonPositiveDt) {
  EXPECT_THROW(integrate_twist(Pose::identity(), Twist(), 0.0), std::invalid_argument);
}

TEST(PoseError, SamePoseIsZero) {
  Rng rng(5);
  const Pose p = random_pose(rng);
  EXPECT_EQ(pose_error(p, p).translation, 0.0);
  EXPECT_EQ(pose_error(p, p).rotation, 0.0);
}

TEST(PoseError, ThreeCentimetres) {
  const auto e = pose_error(Pose::identity(), Pose::translate(0.03, 0, 0));
  EXPECT_DOUBLE_EQ(e.translation, 0.03);
  EXPECT_EQ(e.rotation, 0.0);
}

TEST(PoseError, FiveDegreeRotation) {
  const Pose r(Quat(Eigen::AngleAxisd(5.0 * kPi / 180.0, Vec3::UnitZ())), Vec3::Zero());
  const auto e = pose_error(Pose::identity(), r);
  EXPECT_NEAR(e.rotation, 0.0436, 5e-5);
  EXPECT_NEAR(e.rotation, 2.0 * std::sin(1.25 * kPi / 180.0), 1e-12);
}

TEST(PoseError, DoubleCoverGivesSameError) {
  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng);
    Pose flipped = b;
    flipped.rotation.coeffs() = -b.rotation.coeffs();
    EXPECT_NEAR(pose_error(a, b).rotation, pose_error(a, flipped).rotation, 1e-15);
  }
}

TEST(Interpolate, EndpointsAndMidpoint) {
  const Pose a = Pose::translate(0, 0, 0);
  const Pose b(Quat(Eigen::AngleAxisd(0.4, Vec3::UnitY())), Vec3(2, 0, 0));
  EXPECT_LT(pose_error(interpolate(a, b, 0.0), a).rotation, 1e-12);
  EXPECT_LT(pose_error(interpolate(a, b, 1.0), b).rotation, 1e-12);
  const Pose m = interpolate(a, b, 0.5);
  EXPECT_TRUE(m.translation.isApprox(Vec3(1, 0, 0)));
  EXPECT_NEAR(m.rotation.angularDistance(a.rotation), 0.2, 1e-12);
}

TEST(Intrinsics, ValidatesPrincipalPoint) {
  Intrinsics in;
  in.cx = 200;
  EXPECT_THROW(in.validate(), std::invalid_argument);
  Intrinsics ok;
  EXPECT_NO_THROW(ok.validate());
  EXPECT_TRUE(ok.to_pixel(ok.normalize(10.0, 20.0).x(), ok.normalize(10.0, 20.0).y()).isApprox(Vec2(10, 20)));
}

TEST(ImageBuffer, ValidateRejectsOutOfRange) {
  ImageBuffer img(Intrinsics{}, 0.5);
  EXPECT_NO_THROW(img.validate());
  img(3, 3) = 1.5;
  EXPECT_THROW(img.validate(), std::invalid_argument);
}

TEST(Rng, Deterministic) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.bits(), b.bits());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
}
