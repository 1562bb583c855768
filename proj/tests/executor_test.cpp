#include "helpers.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

using namespace i2s;
using i2s::testing::wall_scenario;

namespace {

executor::TrialResult run_i2s(const sim::Scenario& sc, const executor::RunConfig& cfg) {
  foresight::KeyframeOracle oracle(sc, cfg.oracle);
  executor::FlowServoController controller(cfg);
  return executor::run_trial(sc, cfg, oracle, controller);
}

// Door scenario with the camera placed straight in front of the aperture, offset sideways by dx.
sim::Scenario door_facing(std::uint64_t seed, double dx) {
  auto sc = sim::make_door_scenario(seed);
  sc.start = Pose(Quat::Identity(), sc.goal().translation - Vec3(-dx, 0.0, 1.1));
  sc.keyframes.front() = sc.start;
  return sc;
}

}  // namespace

TEST(RunTrial, StartAtGoalSucceedsWithoutMoving) {
  const auto sc = wall_scenario(Pose::identity(), Pose::identity());
  const auto r = run_i2s(sc, executor::default_run_config());
  EXPECT_EQ(r.outcome, executor::Outcome::success);
  EXPECT_EQ(r.steps, 0);
  EXPECT_EQ(r.trans_err, 0.0);
}

TEST(InnerServo, RespectsStepBudget) {
  const auto sc = wall_scenario(Pose::translate(0.1, 0, 0), Pose::identity());
  const auto cfg = executor::ground_truth_run_config();
  executor::TrialState state(sc, cfg);
  foresight::KeyframeOracle oracle(sc, cfg.oracle);
  executor::FlowServoController controller(cfg);
  const auto inner = executor::inner_servo(oracle.subgoal(8), state, controller, 1);
  EXPECT_FALSE(inner.converged);
  EXPECT_EQ(inner.steps, 1);
  EXPECT_EQ(state.records().size(), 1u);
  EXPECT_EQ(state.records()[0].step, 0);
}

TEST(RunTrial, LateralOffsetConvergesWithExactPerception) {
  const auto sc = wall_scenario(Pose::translate(0.1, 0, 0), Pose::identity());
  const auto r = run_i2s(sc, executor::ground_truth_run_config());
  EXPECT_EQ(r.outcome, executor::Outcome::success);
  EXPECT_LT(r.trans_err, 0.005);
  EXPECT_LT(r.rot_err, 0.03);
  for (const auto& rec : r.records) {
    EXPECT_LE(rec.twist.linear.norm(), 0.5 + 1e-12);
    EXPECT_LE(rec.twist.angular.norm(), 0.5 + 1e-12);
  }
}

TEST(RunTrial, LateralOffsetConvergesWithEstimatedPerception) {
  const auto sc = wall_scenario(Pose::translate(0.1, 0, 0), Pose::identity());
  const auto r = run_i2s(sc, executor::default_run_config());
  EXPECT_EQ(r.outcome, executor::Outcome::success);
  EXPECT_LT(r.trans_err, 0.03);
}

TEST(RunTrial, BlankViewIsDegenerate) {
  // facing away from the only wall: the start view is pure background
  const Pose away(Quat(Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitY())), Vec3::Zero());
  const auto sc = wall_scenario(away, Pose::identity());
  auto cfg = executor::default_run_config();
  cfg.oracle.n = 2;  // the first sub-goal is the goal view, which does see the wall
  const auto r = run_i2s(sc, cfg);
  EXPECT_EQ(r.outcome, executor::Outcome::degenerate_flow);
  EXPECT_EQ(r.steps, 0);
}

TEST(RunTrial, CollisionHaltsTrial) {
  auto sc = door_facing(21, 0.9);
  auto cfg = executor::default_run_config();
  foresight::KeyframeOracle oracle(sc, cfg.oracle);
  // a controller that drives straight ahead regardless of the images
  struct Forward : executor::ServoController {
    Twist command(const executor::TrialState&, const foresight::Subgoal&) override {
      return Twist(Vec3(0, 0, 0.5), Vec3::Zero());
    }
  } forward;
  const auto r = executor::run_trial(sc, cfg, oracle, forward);
  EXPECT_EQ(r.outcome, executor::Outcome::collision);
  ASSERT_FALSE(r.records.empty());
  EXPECT_TRUE(r.records.back().collision);
  for (std::size_t i = 0; i + 1 < r.records.size(); ++i) EXPECT_FALSE(r.records[i].collision);
}

TEST(CameraAxis, ThroughTheApertureSucceeds) {
  const auto r = executor::run_camera_axis(door_facing(22, 0.0), executor::default_run_config());
  EXPECT_EQ(r.outcome, executor::Outcome::success);
  EXPECT_NEAR(r.trans_err, 0.0, 1e-9);
  EXPECT_EQ(r.steps, 44);  // 1.1 m at 0.5 m/s, 0.05 s per step
}

TEST(CameraAxis, BesideTheApertureCollides) {
  const auto r = executor::run_camera_axis(door_facing(22, 0.9), executor::default_run_config());
  EXPECT_EQ(r.outcome, executor::Outcome::collision);
}

TEST(FinalImageServo, SmallOffsetConverges) {
  const auto sc = wall_scenario(Pose::translate(0.05, -0.03, 0.05), Pose::identity());
  const auto cfg = executor::ground_truth_run_config();
  executor::FlowServoController controller(cfg);
  const auto r = executor::run_final_image_servo(sc, cfg, controller);
  EXPECT_EQ(r.outcome, executor::Outcome::success);
  EXPECT_EQ(r.subgoals, 1);
}

TEST(Log, RoundTrip) {
  const auto sc = wall_scenario(Pose::translate(0.05, 0, 0), Pose::identity());
  const auto r = run_i2s(sc, executor::ground_truth_run_config());
  ASSERT_GT(r.steps, 0);
  std::stringstream ss;
  executor::write_log(ss, r);
  const auto back = executor::read_log(ss);
  EXPECT_EQ(back.outcome, r.outcome);
  EXPECT_EQ(back.steps, r.steps);
  EXPECT_EQ(back.subgoals, r.subgoals);
  EXPECT_DOUBLE_EQ(back.trans_err, r.trans_err);
  ASSERT_EQ(back.records.size(), r.records.size());
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    EXPECT_EQ(back.records[i].twist.vector(), r.records[i].twist.vector());
    EXPECT_EQ(back.records[i].pose.translation, r.records[i].pose.translation);
    EXPECT_EQ(back.records[i].photometric_error, r.records[i].photometric_error);
  }
}

TEST(Log, RejectsMalformedInput) {
  std::stringstream empty;
  EXPECT_THROW(executor::read_log(empty), executor::LogError);
  std::stringstream garbage("{not json\n");
  EXPECT_THROW(executor::read_log(garbage), executor::LogError);
  std::stringstream bad_pose(
      R"({"type":"step","step":0,"pose":[1,0,0],"twist":[0,0,0,0,0,0],"photometric_error":1,"subgoal":0,"collision":false})"
      "\n");
  EXPECT_THROW(executor::read_log(bad_pose), executor::LogError);
  std::stringstream mismatch(R"({"type":"result","outcome":"success","trans_err":0,"rot_err":0,"steps":3,"subgoals":1})"
                             "\n");
  EXPECT_THROW(executor::read_log(mismatch), executor::LogError);
}

TEST(RunConfigJson, RoundTrip) {
  auto cfg = executor::default_run_config();
  cfg.eps_phi = 3.5;
  cfg.oracle.n = 4;
  cfg.oracle.noise.sigma_t = 0.02;
  cfg.solver.motion_depth.gain = 0.25;
  cfg.depth_source = executor::DepthSource::flowdepth;
  const auto back = executor::run_config_from_json(executor::to_json(cfg));
  EXPECT_EQ(executor::to_json(back), executor::to_json(cfg));
  EXPECT_EQ(back.oracle.n, 4);
  EXPECT_EQ(back.depth_source, executor::DepthSource::flowdepth);
}

TEST(RunConfigJson, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(executor::run_config_from_json({{"epsilon_p", 1.0}}), std::invalid_argument);
  EXPECT_THROW(executor::run_config_from_json({{"dt", -1.0}}), std::invalid_argument);
  EXPECT_THROW(executor::run_config_from_json({{"depth_source", "lidar"}}), std::invalid_argument);
  EXPECT_EQ(executor::run_config_from_json({{"dt", 0.1}}).dt, 0.1);
}

TEST(Outcome, StringRoundTrip) {
  for (auto o : {executor::Outcome::success, executor::Outcome::collision, executor::Outcome::timeout,
                 executor::Outcome::degenerate_flow})
    EXPECT_EQ(executor::outcome_from_string(executor::to_string(o)), o);
  EXPECT_THROW(executor::outcome_from_string("crashed"), std::invalid_argument);
}
