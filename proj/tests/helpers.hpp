#pragma once

#include "i2s/i2s.hpp"

#include <vector>

namespace i2s::testing {

// A single finely textured quad filling the view of an identity camera at depth z.
inline sim::Scene wall_scene(double z, double half = 6.0, std::uint64_t seed = 7) {
  sim::TexturedQuad q{Vec3(-half, -half, z), Vec3(2 * half, 0, 0), Vec3(0, 2 * half, 0), {}, std::nullopt};
  q.texture.noise_seed = seed;
  q.texture.noise_scale = 0.15;
  q.texture.checker_period = 0.08;
  return sim::Scene({q}, 0.0);
}

// Scenario around wall_scene: start and goal poses given, straight-line keyframes.
inline sim::Scenario wall_scenario(const Pose& start, const Pose& goal, double z = 2.0) {
  sim::Scenario sc;
  sc.task = sim::Task::reach;
  sc.prompt = "reach the target";
  sc.quads = wall_scene(z).quads();
  sc.start = start;
  sc.keyframes = sim::resample_path({start, goal}, sim::kDefaultKeyframes);
  return sc;
}

inline DepthMap constant_depth(const Intrinsics& intr, double z) {
  DepthMap d(intr.width, intr.height);
  for (auto& x : d.depths.data()) x = z;
  for (auto& m : d.valid.data()) m = 1;
  return d;
}

}  // namespace i2s::testing
