#pragma once

#include "i2s/core/geometry.hpp"
#include "i2s/core/image.hpp"
#include "i2s/core/random.hpp"
#include "i2s/sim/scene.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace i2s::sim {

enum class Task { door, reach };

inline const char* to_string(Task t) { return t == Task::door ? "door" : "reach"; }

inline Task task_from_string(const std::string& s) {
  if (s == "door") return Task::door;
  if (s == "reach") return Task::reach;
  throw std::invalid_argument("unknown task '" + s + "'");
}

struct Scenario {
  Task task = Task::door;
  std::uint64_t seed = 0;
  std::string prompt;
  std::vector<TexturedQuad> quads;
  double background = 0.0;
  Intrinsics intrinsics;
  CollisionBody body;
  Pose start;
  std::vector<Pose> keyframes;  // reference trajectory, start through goal
  std::optional<int> door_quad;  // wall whose hole is the aperture to cross

  Scene scene() const { return Scene(quads, background); }
  const Pose& goal() const { return keyframes.back(); }

  void validate() const {
    intrinsics.validate();
    if (keyframes.empty()) throw std::invalid_argument("Scenario: empty reference trajectory");
    if (prompt.empty()) throw std::invalid_argument("Scenario: empty prompt");
    if (door_quad && (*door_quad < 0 || *door_quad >= static_cast<int>(quads.size()) || !quads[*door_quad].hole))
      throw std::invalid_argument("Scenario: door quad must exist and carry a hole");
    (void)scene();
  }
};

/// Reference-trajectory keyframes; foresight oracles resample to their own n.
inline constexpr int kDefaultKeyframes = 9;

/// Camera orientation whose optical axis points from eye to target, image-down close to y_hint.
inline Quat look_at(const Vec3& eye, const Vec3& target, const Vec3& y_hint = kWorldDown) {
  const Vec3 z = (target - eye).normalized();
  Vec3 y = y_hint - y_hint.dot(z) * z;
  if (y.norm() < 1e-9) throw std::invalid_argument("look_at: hint parallel to viewing direction");
  y.normalize();
  Mat3 r;
  r.col(0) = y.cross(z);
  r.col(1) = y;
  r.col(2) = z;
  return Quat(r).normalized();
}

/// Arc-length resampling of a keyframe polyline: positions linear, orientations slerped.
inline std::vector<Pose> resample_path(const std::vector<Pose>& path, int n) {
  if (path.empty()) throw std::invalid_argument("resample_path: empty path");
  if (n < 2) throw std::invalid_argument("resample_path: need at least 2 samples");
  if (path.size() == 1) return std::vector<Pose>(static_cast<std::size_t>(n), path.front());
  std::vector<double> cum(path.size(), 0.0);
  for (std::size_t i = 1; i < path.size(); ++i)
    cum[i] = cum[i - 1] + (path[i].translation - path[i - 1].translation).norm() +
             1e-9 * path[i].rotation.angularDistance(path[i - 1].rotation);
  const double total = cum.back();
  std::vector<Pose> out;
  out.reserve(static_cast<std::size_t>(n));
  std::size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    if (k == 0) { out.push_back(path.front()); continue; }
    if (k == n - 1) { out.push_back(path.back()); continue; }
    const double s = total * k / (n - 1);
    while (seg + 2 < path.size() && cum[seg + 1] < s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double f = len > 0.0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
    out.push_back(interpolate(path[seg], path[seg + 1], f));
  }
  return out;
}

namespace detail {

inline TextureParams random_texture(Rng& rng, double scale) {
  TextureParams t;
  t.checker_period = scale * rng.uniform(0.4, 0.64);
  t.noise_scale = scale * rng.uniform(0.45, 0.8);
  t.noise_seed = rng.bits();
  t.base = rng.uniform(0.4, 0.6);
  t.contrast = rng.uniform(0.32, 0.45);
  return t;
}

}  // namespace detail

/// Drone-scale room: a front wall with a door, a floor, and a back wall seen through the door.
/// The reference path approaches a point 0.8 m in front of the door, then passes straight through.
inline Scenario make_door_scenario(std::uint64_t seed, int keyframes = kDefaultKeyframes) {
  Rng rng(derive_seed(seed, 1));
  Scenario sc;
  sc.task = Task::door;
  sc.seed = seed;
  sc.prompt = "cross the door";
  sc.background = 0.0;
  sc.body = {0.15, 0.2};

  const double floor_y = 1.2;
  const double wall_z = rng.uniform(1.3, 2.3);
  const double door_x = rng.uniform(-0.4, 0.4);
  const double door_half = 0.6;
  const double door_top = -0.9;
  const double back_z = wall_z + 8.0;

  const double wx0 = -5.0, wx1 = 5.0, wy0 = -2.5;
  TexturedQuad front{Vec3(wx0, wy0, wall_z), Vec3(wx1 - wx0, 0, 0), Vec3(0, floor_y - wy0, 0),
                     detail::random_texture(rng, 1.0), std::nullopt};
  front.hole = Aperture{(door_x - door_half - wx0) / (wx1 - wx0), (door_top - wy0) / (floor_y - wy0),
                        (door_x + door_half - wx0) / (wx1 - wx0), 1.0};
  TexturedQuad back{Vec3(-10.0, -5.0, back_z), Vec3(20.0, 0, 0), Vec3(0, floor_y + 5.0, 0),
                    detail::random_texture(rng, 2.0), std::nullopt};
  TexturedQuad floor{Vec3(-10.0, floor_y, -3.0), Vec3(20.0, 0, 0), Vec3(0, 0, back_z + 3.0),
                     detail::random_texture(rng, 1.0), std::nullopt};
  sc.quads = {front, back, floor};
  sc.door_quad = 0;

  const double side = rng.sign();
  const Vec3 start_pos(door_x + side * rng.uniform(0.2, 1.0), rng.uniform(-0.1, 0.1), rng.uniform(-0.2, 0.2));
  // aimed at the wall beside the door on the start's side, so the optical axis rarely clears the hole
  const Vec3 aim(door_x + side * rng.uniform(0.2, 1.2), rng.uniform(-0.15, 0.15), wall_z);
  const double deg = std::numbers::pi / 180.0;
  sc.start = Pose(look_at(start_pos, aim) * Quat(Eigen::AngleAxisd(rng.uniform(-4.0, 4.0) * deg, Vec3::UnitZ())),
                  start_pos);

  const Pose approach(Quat::Identity(), Vec3(door_x, 0.0, wall_z - 0.8));
  const Pose goal(Quat::Identity(), Vec3(door_x, 0.0, wall_z + 0.3));
  // dense polyline so arc-length resampling follows the corner at the approach point
  std::vector<Pose> dense;
  const int steps = 64;
  for (int i = 0; i <= steps; ++i) dense.push_back(interpolate(sc.start, approach, double(i) / steps));
  for (int i = 1; i <= steps; ++i) dense.push_back(interpolate(approach, goal, double(i) / steps));
  sc.keyframes = resample_path(dense, keyframes);
  return sc;
}

/// Tabletop reach: a looking-down camera moves from an oblique start above the table to a pose
/// 30-40 cm above a target patch.
inline Scenario make_reach_scenario(std::uint64_t seed, int keyframes = kDefaultKeyframes) {
  Rng rng(derive_seed(seed, 2));
  Scenario sc;
  sc.task = Task::reach;
  sc.seed = seed;
  sc.prompt = "reach the target";
  sc.background = 0.0;
  sc.body = {0.15, 0.1};

  TexturedQuad table{Vec3(-1.0, 0.0, -1.0), Vec3(2.0, 0, 0), Vec3(0, 0, 2.0), detail::random_texture(rng, 0.3),
                     std::nullopt};
  const double tx = rng.uniform(-0.2, 0.2);
  const double tz = rng.uniform(-0.2, 0.2);
  TexturedQuad target{Vec3(tx - 0.15, -0.002, tz - 0.15), Vec3(0.3, 0, 0), Vec3(0, 0, 0.3),
                      detail::random_texture(rng, 0.15), std::nullopt};
  target.texture.contrast = 0.48;
  sc.quads = {table, target};
  for (int i = 0; i < 2; ++i) {
    const double ox = rng.uniform(-0.6, 0.6);
    const double oz = rng.uniform(-0.6, 0.6);
    sc.quads.push_back({Vec3(ox - 0.08, -0.001, oz - 0.08), Vec3(0.16, 0, 0), Vec3(0, 0, 0.16),
                        detail::random_texture(rng, 0.15), std::nullopt});
  }

  const double deg = std::numbers::pi / 180.0;
  const Vec3 target_center(tx, 0.0, tz);
  const Quat look_down(Eigen::AngleAxisd(rng.uniform(-30.0, 30.0) * deg, kWorldDown) *
                       Eigen::AngleAxisd(-std::numbers::pi / 2.0, Vec3::UnitX()));
  const Pose goal(look_down, target_center + Vec3(rng.uniform(-0.03, 0.03), -rng.uniform(0.3, 0.4),
                                                  rng.uniform(-0.03, 0.03)));
  const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double lateral = rng.uniform(0.2, 0.35);
  const Vec3 start_pos = target_center + Vec3(lateral * std::cos(heading), -rng.uniform(0.55, 0.75),
                                              lateral * std::sin(heading));
  const Vec3 aim = target_center + Vec3(rng.uniform(-0.08, 0.08), 0.0, rng.uniform(-0.08, 0.08));
  sc.start = Pose(look_at(start_pos, aim, goal.rotation * Vec3::UnitY()), start_pos);
  sc.keyframes = resample_path({sc.start, goal}, keyframes);
  return sc;
}

inline Scenario make_scenario(Task task, std::uint64_t seed, int keyframes = kDefaultKeyframes) {
  return task == Task::door ? make_door_scenario(seed, keyframes) : make_reach_scenario(seed, keyframes);
}

/// Whether a camera segment passes through a door quad's plane, and whether it does so inside the hole.
struct DoorCrossing {
  bool crossed = false;
  bool inside_aperture = false;
  double from_side = 0.0;  // sign of the plane offset before the crossing
};

inline DoorCrossing door_crossing(const Scene& scene, int door_quad, const Vec3& from, const Vec3& to) {
  const auto a = scene.local_coords(door_quad, from);
  const auto b = scene.local_coords(door_quad, to);
  if ((a[2] < 0.0) == (b[2] < 0.0) || a[2] == 0.0) return {};
  const double t = a[2] / (a[2] - b[2]);
  const double u = a[0] + t * (b[0] - a[0]);
  const double v = a[1] + t * (b[1] - a[1]);
  const auto& hole = scene.quads()[static_cast<std::size_t>(door_quad)].hole;
  return {true, hole && hole->contains(u, v), a[2] < 0.0 ? -1.0 : 1.0};
}

}  // namespace i2s::sim
