#pragma once

#include "i2s/core/geometry.hpp"
#include "i2s/core/image.hpp"
#include "i2s/sim/texture.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace i2s::sim {

/// World frame shares the camera convention: x right, y down, z forward.
inline const Vec3 kWorldDown = Vec3::UnitY();

/// Axis-aligned rectangle in quad-local [0,1]^2 coordinates.
struct Aperture {
  double u0 = 0.0, v0 = 0.0, u1 = 0.0, v1 = 0.0;

  bool contains(double a, double b) const { return a > u0 && a < u1 && b > v0 && b < v1; }
  bool operator==(const Aperture&) const = default;
};

/// Parallelogram origin + a*edge_u + b*edge_v, (a, b) in [0,1]^2, optionally with a hole.
struct TexturedQuad {
  Vec3 origin = Vec3::Zero();
  Vec3 edge_u = Vec3::UnitX();
  Vec3 edge_v = Vec3::UnitY();
  TextureParams texture;
  std::optional<Aperture> hole;

  bool operator==(const TexturedQuad&) const = default;
};

struct CollisionBody {
  double radius = 0.15;
  double height = 0.2;  // total extent along the world vertical, centered on the camera
};

struct RayHit {
  int quad = -1;
  double s = std::numeric_limits<double>::infinity();  // ray parameter; camera-frame depth for z=1 rays
  double a = 0.0;
  double b = 0.0;
};

class Scene {
 public:
  Scene(std::vector<TexturedQuad> quads, double background)
      : quads_(std::move(quads)), background_(background) {
    if (quads_.empty()) throw std::invalid_argument("Scene: at least one quad required");
    if (!(background_ >= 0.0 && background_ <= 1.0)) throw std::invalid_argument("Scene: background outside [0,1]");
    frames_.reserve(quads_.size());
    for (const auto& q : quads_) frames_.push_back(make_frame(q));
  }

  const std::vector<TexturedQuad>& quads() const { return quads_; }
  double background() const { return background_; }

  /// Nearest intersection of origin + s*dir, s > 0.
  RayHit cast(const Vec3& origin, const Vec3& dir) const {
    RayHit best;
    for (std::size_t i = 0; i < quads_.size(); ++i) {
      const auto& f = frames_[i];
      const double denom = f.normal.dot(dir);
      if (std::abs(denom) < 1e-12) continue;
      const double s = f.normal.dot(quads_[i].origin - origin) / denom;
      if (!(s > 1e-9) || s >= best.s) continue;
      const Vec3 rel = origin + s * dir - quads_[i].origin;
      const double a = f.dual_u.dot(rel);
      const double b = f.dual_v.dot(rel);
      if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0) continue;
      if (quads_[i].hole && quads_[i].hole->contains(a, b)) continue;
      best = {static_cast<int>(i), s, a, b};
    }
    return best;
  }

  /// Quantized intensity at a hit. pixel_angle (radians per pixel) sets the texture filter
  /// footprint from the hit distance and incidence; zero samples the texture exactly.
  double shade(const RayHit& hit, const Vec3& dir = Vec3::UnitZ(), double pixel_angle = 0.0) const {
    if (hit.quad < 0) return background_;
    const auto& q = quads_[static_cast<std::size_t>(hit.quad)];
    const auto& f = frames_[static_cast<std::size_t>(hit.quad)];
    double footprint = 0.0;
    if (pixel_angle > 0.0) {
      const double len = dir.norm();
      const double incidence = std::max(std::abs(f.normal.dot(dir)) / len, 0.05);
      footprint = hit.s * len * pixel_angle / std::sqrt(incidence);
    }
    return quantize8(texture_intensity(q.texture, hit.a * f.len_u, hit.b * f.len_v, footprint));
  }

  /// Local (a, b) coordinates of a world point projected onto a quad's plane, plus signed offset along the normal.
  std::array<double, 3> local_coords(int quad, const Vec3& p) const {
    const auto& q = quads_[static_cast<std::size_t>(quad)];
    const auto& f = frames_[static_cast<std::size_t>(quad)];
    const Vec3 rel = p - q.origin;
    return {f.dual_u.dot(rel), f.dual_v.dot(rel), f.normal.dot(rel)};
  }

  const Vec3& normal(int quad) const { return frames_[static_cast<std::size_t>(quad)].normal; }

 private:
  struct Frame {
    Vec3 normal;  // unit
    Vec3 dual_u;
    Vec3 dual_v;
    double len_u = 0.0;
    double len_v = 0.0;
  };

  static Frame make_frame(const TexturedQuad& q) {
    const Vec3 n = q.edge_u.cross(q.edge_v);
    if (n.norm() < 1e-12 * std::max(1.0, q.edge_u.norm() * q.edge_v.norm()))
      throw std::invalid_argument("TexturedQuad: edges are linearly dependent");
    if (q.hole) {
      const auto& h = *q.hole;
      if (!(0.0 <= h.u0 && h.u0 < h.u1 && h.u1 <= 1.0 && 0.0 <= h.v0 && h.v0 < h.v1 && h.v1 <= 1.0))
        throw std::invalid_argument("TexturedQuad: hole must lie inside [0,1]^2");
    }
    Frame f;
    f.normal = n.normalized();
    const Vec3 cu = q.edge_v.cross(f.normal);
    const Vec3 cv = f.normal.cross(q.edge_u);
    f.dual_u = cu / q.edge_u.dot(cu);
    f.dual_v = cv / q.edge_v.dot(cv);
    f.len_u = q.edge_u.norm();
    f.len_v = q.edge_v.norm();
    return f;
  }

  std::vector<TexturedQuad> quads_;
  double background_;
  std::vector<Frame> frames_;
};

/// World-frame ray direction through pixel (u, v), scaled so its camera-frame z is 1.
inline Vec3 pixel_ray(const Pose& camera, const Intrinsics& intr, double u, double v) {
  const Vec2 xy = intr.normalize(u, v);
  return camera.rotation * Vec3(xy.x(), xy.y(), 1.0);
}

struct Render {
  ImageBuffer image;
  DepthMap depth;
};

inline Render render(const Scene& scene, const Pose& camera, const Intrinsics& intr) {
  intr.validate();
  Render out{ImageBuffer(intr, scene.background()), DepthMap(intr.width, intr.height)};
  const double pixel_angle = 1.0 / std::sqrt(intr.fx * intr.fy);
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const Vec3 dir = pixel_ray(camera, intr, u, v);
      const RayHit hit = scene.cast(camera.translation, dir);
      out.image(u, v) = scene.shade(hit, dir, pixel_angle);
      if (hit.quad >= 0) {
        out.depth.depths(u, v) = hit.s;
        out.depth.valid(u, v) = 1;
      }
    }
  }
  return out;
}

/// Reprojects every surface point seen from cam_a into cam_b. Pixels that miss, leave the
/// frame, or are hidden in cam_b by more than occlusion_tol meters are invalid.
inline FlowField ground_truth_flow(const Scene& scene, const Pose& cam_a, const Pose& cam_b, const Intrinsics& intr,
                                   double occlusion_tol = 1e-3, int stride = 1) {
  intr.validate();
  if (stride < 1) throw std::invalid_argument("ground_truth_flow: stride must be >= 1");
  FlowField flow(intr.width, intr.height);
  const Quat qb_inv = cam_b.rotation.conjugate();
  for (int v = 0; v < intr.height; v += stride) {
    for (int u = 0; u < intr.width; u += stride) {
      const Vec3 dir = pixel_ray(cam_a, intr, u, v);
      const RayHit hit = scene.cast(cam_a.translation, dir);
      if (hit.quad < 0) continue;
      const Vec3 world = cam_a.translation + hit.s * dir;
      const Vec3 in_b = qb_inv * (world - cam_b.translation);
      if (in_b.z() <= 1e-9) continue;
      const Vec2 px = intr.to_pixel(in_b.x() / in_b.z(), in_b.y() / in_b.z());
      if (!intr.contains(px.x(), px.y())) continue;
      const RayHit seen = scene.cast(cam_b.translation, cam_b.rotation * (in_b / in_b.z()));
      if (seen.s < in_b.z() - occlusion_tol) continue;
      flow.vectors(u, v) = px - Vec2(u, v);
      flow.valid(u, v) = 1;
    }
  }
  return flow;
}

namespace detail {

using Polygon3 = std::vector<Vec3>;

/// Keeps the part of a convex polygon where dot(p, axis) <= limit.
inline Polygon3 clip(const Polygon3& poly, const Vec3& axis, double limit) {
  Polygon3 out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = poly[i];
    const Vec3& q = poly[(i + 1) % n];
    const double dp = p.dot(axis) - limit;
    const double dq = q.dot(axis) - limit;
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) out.push_back(p + (dp / (dp - dq)) * (q - p));
  }
  return out;
}

inline double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

/// Distance from p to a convex 2-D polygon (0 if inside). Degenerate polygons are handled as segments.
inline double convex_distance(const Vec2& p, const std::vector<Vec2>& poly) {
  if (poly.empty()) return std::numeric_limits<double>::infinity();
  if (poly.size() == 1) return (poly[0] - p).norm();
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    area += a.x() * b.y() - a.y() * b.x();
  }
  if (std::abs(area) > 1e-14) {
    bool inside = true;
    for (std::size_t i = 0; i < poly.size() && inside; ++i) {
      const Vec2 e = poly[(i + 1) % poly.size()] - poly[i];
      const Vec2 r = p - poly[i];
      const double cross = e.x() * r.y() - e.y() * r.x();
      inside = area > 0.0 ? cross >= 0.0 : cross <= 0.0;
    }
    if (inside) return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i)
    best = std::min(best, segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  return best;
}

/// Convex pieces of a quad with its hole removed, in (a, b) coordinates.
inline std::vector<std::array<double, 4>> solid_pieces(const TexturedQuad& q) {
  if (!q.hole) return {{0.0, 0.0, 1.0, 1.0}};
  const auto& h = *q.hole;
  std::vector<std::array<double, 4>> pieces;
  auto add = [&](double a0, double b0, double a1, double b1) {
    if (a1 > a0 && b1 > b0) pieces.push_back({a0, b0, a1, b1});
  };
  add(0.0, 0.0, h.u0, 1.0);
  add(h.u1, 0.0, 1.0, 1.0);
  add(h.u0, 0.0, h.u1, h.v0);
  add(h.u0, h.v1, h.u1, 1.0);
  return pieces;
}

}  // namespace detail

/// True iff the vertical cylinder centered at the camera touches any solid part of any quad.
inline bool check_collision(const Scene& scene, const CollisionBody& body, const Pose& camera) {
  if (!(body.radius > 0.0)) throw std::invalid_argument("CollisionBody: radius must be positive");
  const Vec3& c = camera.translation;
  const Vec3 down = kWorldDown;
  const double half = 0.5 * body.height;
  const Vec3 h1 = std::abs(down.x()) < 0.9 ? Vec3(down.cross(Vec3::UnitX()).normalized())
                                           : Vec3(down.cross(Vec3::UnitZ()).normalized());
  const Vec3 h2 = down.cross(h1);
  for (const auto& q : scene.quads()) {
    for (const auto& piece : detail::solid_pieces(q)) {
      detail::Polygon3 poly = {
          q.origin + piece[0] * q.edge_u + piece[1] * q.edge_v - c,
          q.origin + piece[2] * q.edge_u + piece[1] * q.edge_v - c,
          q.origin + piece[2] * q.edge_u + piece[3] * q.edge_v - c,
          q.origin + piece[0] * q.edge_u + piece[3] * q.edge_v - c,
      };
      poly = detail::clip(poly, down, half);
      poly = detail::clip(poly, -down, half);
      if (poly.empty()) continue;
      std::vector<Vec2> flat;
      flat.reserve(poly.size());
      for (const auto& p : poly) flat.emplace_back(p.dot(h1), p.dot(h2));
      if (detail::convex_distance(Vec2::Zero(), flat) <= body.radius) return true;
    }
  }
  return false;
}

}  // namespace i2s::sim
