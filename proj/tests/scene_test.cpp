#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace i2s;
using i2s::testing::wall_scene;

TEST(Texture, FilteredSquareMatchesHardCheckerAtZeroWidth) {
  for (double t : {0.1, 0.7, 1.3, 1.9, -0.4, -1.2}) {
    const double hard = (static_cast<long>(std::floor(t)) % 2 == 0) ? 1.0 : -1.0;
    EXPECT_DOUBLE_EQ(sim::detail::filtered_square(t, 0.0), hard) << t;
    EXPECT_NEAR(sim::detail::filtered_square(t, 1e-5), hard, 1e-3) << t;
  }
}

TEST(Texture, FilteredSquareAveragesOutOverWholePeriods) {
  // a box of width 2 always covers one +1 and one -1 cell
  for (double t : {0.0, 0.3, 1.7}) EXPECT_NEAR(sim::detail::filtered_square(t, 2.0), 0.0, 1e-12);
}

TEST(Texture, FilterGainLimits) {
  EXPECT_DOUBLE_EQ(sim::filter_gain(0.0, 1.0), 1.0);
  EXPECT_LT(sim::filter_gain(1.0, 1.0), 1e-6);
}

TEST(Texture, IntensityInRangeAndFlattensWithFootprint) {
  sim::TextureParams tex;
  double spread_sharp = 0.0, spread_blur = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = 0.037 * i, y = 0.021 * i;
    const double a = sim::texture_intensity(tex, x, y);
    const double b = sim::texture_intensity(tex, x, y, 50.0);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    spread_sharp += std::abs(a - tex.base);
    spread_blur += std::abs(b - tex.base);
  }
  EXPECT_LT(spread_blur, 0.05 * spread_sharp);
}

TEST(Render, FrontoParallelDepthIsExact) {
  const Intrinsics intr;
  const auto r = sim::render(wall_scene(2.0), Pose::identity(), intr);
  EXPECT_EQ(r.depth.valid_count(), static_cast<std::size_t>(intr.width * intr.height));
  for (double d : r.depth.depths.data()) EXPECT_EQ(d, 2.0);
  EXPECT_NO_THROW(r.image.validate());
}

TEST(Render, DepthAfterMovingTowardWall) {
  const auto r = sim::render(wall_scene(2.0), Pose::translate(0, 0, 0.5), Intrinsics{});
  for (double d : r.depth.depths.data()) EXPECT_DOUBLE_EQ(d, 1.5);
}

TEST(Render, LookingAwayGivesBackground) {
  sim::TexturedQuad q{Vec3(-1, -1, 2), Vec3(2, 0, 0), Vec3(0, 2, 0), {}, std::nullopt};
  const sim::Scene scene({q}, 0.25);
  const Pose away(Quat(Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitY())), Vec3::Zero());
  const auto r = sim::render(scene, away, Intrinsics{});
  EXPECT_EQ(r.depth.valid_count(), 0u);
  for (double p : r.image.pixels.data()) EXPECT_EQ(p, 0.25);
}

TEST(Render, Deterministic) {
  const auto sc = sim::make_door_scenario(3);
  const auto a = sim::render(sc.scene(), sc.start, sc.intrinsics);
  const auto b = sim::render(sc.scene(), sc.start, sc.intrinsics);
  EXPECT_EQ(a.image, b.image);
}

TEST(GroundTruthFlow, SamePoseIsZero) {
  const Intrinsics intr;
  const auto f = sim::ground_truth_flow(wall_scene(2.0), Pose::identity(), Pose::identity(), intr);
  EXPECT_EQ(f.valid_count(), static_cast<std::size_t>(intr.width * intr.height));
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u) EXPECT_LT(f.vectors(u, v).norm(), 1e-12);
}

TEST(GroundTruthFlow, RollIsRigidImageRotation) {
  const Intrinsics intr;  // fx == fy
  const double theta = 0.1;
  const Pose rolled(Quat(Eigen::AngleAxisd(theta, Vec3::UnitZ())), Vec3::Zero());
  const auto f = sim::ground_truth_flow(wall_scene(2.0), Pose::identity(), rolled, intr);
  const Eigen::Rotation2Dd rot(-theta);
  const Vec2 c(intr.cx, intr.cy);
  int checked = 0;
  double worst = 0.0;
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u) {
      if (!f.is_valid(u, v)) continue;
      const Vec2 expected = rot * (Vec2(u, v) - c) + c - Vec2(u, v);
      worst = std::max(worst, (f.vectors(u, v) - expected).cwiseAbs().maxCoeff());
      ++checked;
    }
  EXPECT_GT(checked, intr.width * intr.height / 2);
  EXPECT_LT(worst, 1e-6);
}

TEST(GroundTruthFlow, ForwardMotionIsRadialExpansion) {
  const Intrinsics intr;
  const double z = 2.0, d = 0.4;
  const auto f = sim::ground_truth_flow(wall_scene(z), Pose::identity(), Pose::translate(0, 0, d), intr);
  const Vec2 c(intr.cx, intr.cy);
  double worst = 0.0;
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u) {
      if (!f.is_valid(u, v)) continue;
      const Vec2 expected = (Vec2(u, v) - c) * (z / (z - d) - 1.0);
      worst = std::max(worst, (f.vectors(u, v) - expected).norm());
    }
  EXPECT_LT(worst, 1e-9);
}

TEST(GroundTruthFlow, StrideLeavesOffLatticeInvalid) {
  const Intrinsics intr;
  const auto f = sim::ground_truth_flow(wall_scene(2.0), Pose::identity(), Pose::translate(0.05, 0, 0), intr, 1e-3, 4);
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u)
      if (u % 4 != 0 || v % 4 != 0) { EXPECT_FALSE(f.is_valid(u, v)); }
  // lattice points stay valid except the columns that leave the frame
  EXPECT_EQ(f.valid_count(), static_cast<std::size_t>((intr.width / 4 - 1) * (intr.height / 4)));
  EXPECT_THROW(sim::ground_truth_flow(wall_scene(2.0), Pose::identity(), Pose::identity(), intr, 1e-3, 0),
               std::invalid_argument);
}

TEST(GroundTruthFlow, WarpsImageOntoSecondView) {
  // the second view sampled at u + flow reproduces the first view's intensity
  const auto sc = sim::make_door_scenario(5);
  const auto scene = sc.scene();
  const Pose b = integrate_twist(sc.start, Twist(Vec3(0.05, 0.0, 0.2), Vec3(0.0, 0.05, 0.0)), 1.0);
  const auto ra = sim::render(scene, sc.start, sc.intrinsics);
  const auto rb = sim::render(scene, b, sc.intrinsics);
  const auto f = sim::ground_truth_flow(scene, sc.start, b, sc.intrinsics);
  std::vector<double> diffs;
  for (int v = 0; v < sc.intrinsics.height; ++v)
    for (int u = 0; u < sc.intrinsics.width; ++u) {
      if (!f.is_valid(u, v)) continue;
      const Vec2 p = Vec2(u, v) + f.vectors(u, v);
      const int pu = static_cast<int>(std::lround(p.x())), pv = static_cast<int>(std::lround(p.y()));
      if (pu < 0 || pv < 0 || pu >= sc.intrinsics.width || pv >= sc.intrinsics.height) continue;
      diffs.push_back(std::abs(ra.image(u, v) - rb.image(pu, pv)));
    }
  ASSERT_GT(diffs.size(), 1000u);
  std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
  EXPECT_LT(diffs[diffs.size() / 2] * 255.0, 6.0);
}

TEST(Collision, WallDistances) {
  const auto scene = wall_scene(1.0);
  const sim::CollisionBody body{0.15, 0.2};
  EXPECT_FALSE(sim::check_collision(scene, body, Pose::identity()));
  EXPECT_TRUE(sim::check_collision(scene, body, Pose::translate(0, 0, 0.9)));
}

TEST(Collision, CentredInDoorIsFree) {
  // 1 m wide opening in a 4 m wall, camera on the wall plane at the opening's centre
  sim::TexturedQuad wall{Vec3(-2, -2, 1), Vec3(4, 0, 0), Vec3(0, 4, 0), {}, sim::Aperture{0.375, 0.25, 0.625, 0.75}};
  const sim::Scene scene({wall}, 0.0);
  const sim::CollisionBody body{0.15, 0.2};
  EXPECT_FALSE(sim::check_collision(scene, body, Pose::translate(0, 0, 1)));
  // 0.36 m off centre: 0.14 m from the jamb
  EXPECT_TRUE(sim::check_collision(scene, body, Pose::translate(0.36, 0, 1)));
  EXPECT_FALSE(sim::check_collision(scene, body, Pose::translate(0.34, 0, 1)));
}

TEST(DoorCrossing, InsideAndOutside) {
  const auto sc = sim::make_door_scenario(1);
  const auto scene = sc.scene();
  const Vec3 g = sc.goal().translation;
  const auto through = sim::door_crossing(scene, *sc.door_quad, g - Vec3(0, 0, 2.0), g);
  EXPECT_TRUE(through.crossed);
  EXPECT_TRUE(through.inside_aperture);
  const auto beside = sim::door_crossing(scene, *sc.door_quad, g + Vec3(2.0, 0, -2.0), g + Vec3(2.0, 0, 0));
  EXPECT_TRUE(beside.crossed);
  EXPECT_FALSE(beside.inside_aperture);
  EXPECT_FALSE(sim::door_crossing(scene, *sc.door_quad, g, g + Vec3(0, 0, 0.1)).crossed);
}

TEST(Scenario, SameSeedSameScenario) {
  for (auto task : {sim::Task::door, sim::Task::reach}) {
    const auto a = sim::make_scenario(task, 11), b = sim::make_scenario(task, 11);
    EXPECT_EQ(a.quads, b.quads);
    ASSERT_EQ(a.keyframes.size(), b.keyframes.size());
    for (std::size_t i = 0; i < a.keyframes.size(); ++i) EXPECT_EQ(a.keyframes[i], b.keyframes[i]);
    EXPECT_EQ(a.start, b.start);
  }
}

TEST(Scenario, NineKeyframesByDefault) {
  EXPECT_EQ(sim::make_door_scenario(0).keyframes.size(), 9u);
  EXPECT_EQ(sim::make_reach_scenario(0).keyframes.size(), 9u);
}

TEST(Scenario, DoorGoalLiesPastTheDoorAndStartIsFree) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sc = sim::make_door_scenario(seed);
    const auto scene = sc.scene();
    EXPECT_LT(scene.local_coords(*sc.door_quad, sc.start.translation)[2], 0.0);
    EXPECT_GT(scene.local_coords(*sc.door_quad, sc.goal().translation)[2], 0.0);
    EXPECT_FALSE(sim::check_collision(scene, sc.body, sc.start)) << seed;
    for (const auto& k : sc.keyframes) EXPECT_FALSE(sim::check_collision(scene, sc.body, k)) << seed;
  }
}

TEST(Scenario, ReachKeyframesAreCollisionFree) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sc = sim::make_reach_scenario(seed);
    for (const auto& k : sc.keyframes) EXPECT_FALSE(sim::check_collision(sc.scene(), sc.body, k)) << seed;
  }
}

TEST(Scenario, ResampleKeepsEndpointsAndSpacing) {
  const std::vector<Pose> path{Pose::translate(0, 0, 0), Pose::translate(1, 0, 0), Pose::translate(1, 0, 3)};
  const auto out = sim::resample_path(path, 5);
  ASSERT_EQ(out.size(), 5u);
  EXPECT_EQ(out.front(), path.front());
  EXPECT_EQ(out.back(), path.back());
  for (std::size_t i = 1; i < out.size(); ++i)
    EXPECT_NEAR((out[i].translation - out[i - 1].translation).norm(), 1.0, 0.3);
  EXPECT_TRUE(out[1].translation.isApprox(Vec3(1, 0, 0)));
  EXPECT_THROW(sim::resample_path(path, 1), std::invalid_argument);
}

TEST(ScenarioJson, RoundTrip) {
  for (auto task : {sim::Task::door, sim::Task::reach}) {
    const auto sc = sim::make_scenario(task, 4);
    const auto back = sim::scenario_from_json(nlohmann::json::parse(sim::to_json(sc).dump()));
    EXPECT_EQ(back.quads, sc.quads);
    EXPECT_EQ(back.door_quad, sc.door_quad);
    EXPECT_EQ(back.prompt, sc.prompt);
    EXPECT_EQ(back.intrinsics, sc.intrinsics);
    ASSERT_EQ(back.keyframes.size(), sc.keyframes.size());
    EXPECT_LT(pose_error(back.goal(), sc.goal()).translation, 1e-15);
    EXPECT_EQ(sim::render(back.scene(), back.start, back.intrinsics).image,
              sim::render(sc.scene(), sc.start, sc.intrinsics).image);
  }
}

TEST(ScenarioJson, RejectsBadPose) {
  auto j = sim::to_json(sim::make_door_scenario(0));
  j["start"] = {1, 2, 3};
  EXPECT_THROW(sim::scenario_from_json(j), std::invalid_argument);
}
