#pragma once

#include "i2s/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace i2s::flow {

struct FlowEstimatorConfig {
  int pyramid_levels = 4;
  int window = 9;  // odd, pixels
  int iterations = 10;
  double min_eigenvalue = 1e-5;  // of the window-averaged structure tensor, intensity^2 / px^2
  int stride = 1;                // evaluate every stride-th pixel in u and v; others are left invalid
  double max_fb_error = 0.5;     // px, forward-backward consistency; infinity disables the check

  void validate() const {
    if (pyramid_levels < 1) throw std::invalid_argument("FlowEstimatorConfig: pyramid_levels must be >= 1");
    if (window < 3 || window % 2 == 0) throw std::invalid_argument("FlowEstimatorConfig: window must be odd and >= 3");
    if (iterations < 1) throw std::invalid_argument("FlowEstimatorConfig: iterations must be >= 1");
    if (stride < 1) throw std::invalid_argument("FlowEstimatorConfig: stride must be >= 1");
    if (!(max_fb_error > 0.0)) throw std::invalid_argument("FlowEstimatorConfig: max_fb_error must be positive");
    if (!(min_eigenvalue >= 0.0)) throw std::invalid_argument("FlowEstimatorConfig: negative eigenvalue threshold");
  }
};

namespace detail {

struct Level {
  Grid<double> image;
  Grid<double> grad_u;
  Grid<double> grad_v;
};

inline double at_clamped(const Grid<double>& g, int u, int v) {
  u = std::clamp(u, 0, g.width() - 1);
  v = std::clamp(v, 0, g.height() - 1);
  return g(u, v);
}

inline double bilinear(const Grid<double>& g, double u, double v) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const int iu = static_cast<int>(fu);
  const int iv = static_cast<int>(fv);
  const double au = u - fu;
  const double av = v - fv;
  const double top = (1.0 - au) * at_clamped(g, iu, iv) + au * at_clamped(g, iu + 1, iv);
  const double bot = (1.0 - au) * at_clamped(g, iu, iv + 1) + au * at_clamped(g, iu + 1, iv + 1);
  return (1.0 - av) * top + av * bot;
}

/// Bilinear samples of the (2*half+1)^2 window centered at (u, v), row-major into out. Every
/// sample shares one fractional offset, so the weights are computed once.
inline void sample_window(const Grid<double>& g, double u, double v, int half, double* out) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const int iu = static_cast<int>(fu) - half;
  const int iv = static_cast<int>(fv) - half;
  const double au = u - fu;
  const double av = v - fv;
  const double w00 = (1.0 - au) * (1.0 - av), w10 = au * (1.0 - av), w01 = (1.0 - au) * av, w11 = au * av;
  const int n = 2 * half + 1;
  const int w = g.width();
  if (iu >= 0 && iv >= 0 && iu + n < w && iv + n < g.height()) {
    const double* base = g.data().data() + static_cast<std::size_t>(iv) * w + iu;
    for (int r = 0; r < n; ++r) {
      const double* row = base + static_cast<std::ptrdiff_t>(r) * w;
      for (int c = 0; c < n; ++c)
        *out++ = w00 * row[c] + w10 * row[c + 1] + w01 * row[c + w] + w11 * row[c + w + 1];
    }
    return;
  }
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      *out++ = w00 * at_clamped(g, iu + c, iv + r) + w10 * at_clamped(g, iu + c + 1, iv + r) +
               w01 * at_clamped(g, iu + c, iv + r + 1) + w11 * at_clamped(g, iu + c + 1, iv + r + 1);
}

/// 5-tap binomial blur followed by 2x decimation; pixel i maps to pixel 2i of the finer level.
inline Grid<double> pyr_down(const Grid<double>& src) {
  static constexpr double k[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  const int w = src.width();
  const int h = src.height();
  Grid<double> tmp(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      double s = 0.0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * at_clamped(src, u + i, v);
      tmp(u, v) = s;
    }
  Grid<double> out((w + 1) / 2, (h + 1) / 2);
  for (int v = 0; v < out.height(); ++v)
    for (int u = 0; u < out.width(); ++u) {
      double s = 0.0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * at_clamped(tmp, 2 * u, 2 * v + i);
      out(u, v) = s;
    }
  return out;
}

inline Level make_level(Grid<double> img) {
  Level l{std::move(img), {}, {}};
  const int w = l.image.width();
  const int h = l.image.height();
  l.grad_u = Grid<double>(w, h);
  l.grad_v = Grid<double>(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      l.grad_u(u, v) = 0.5 * (at_clamped(l.image, u + 1, v) - at_clamped(l.image, u - 1, v));
      l.grad_v(u, v) = 0.5 * (at_clamped(l.image, u, v + 1) - at_clamped(l.image, u, v - 1));
    }
  return l;
}

inline std::vector<Level> build_pyramid(const Grid<double>& img, int levels) {
  std::vector<Level> pyr;
  pyr.push_back(make_level(img));
  for (int l = 1; l < levels; ++l) {
    if (pyr.back().image.width() < 8 || pyr.back().image.height() < 8) break;
    pyr.push_back(make_level(pyr_down(pyr.back().image)));
  }
  return pyr;
}

}  // namespace detail

namespace detail {

/// Coarse-to-fine tracking of one point from pyramid a to pyramid b. Fails when the finest-level
/// structure tensor is too weak or the iteration diverges.
struct TrackScratch {
  std::vector<double> tmpl, gu, gv, warped;
};

inline std::optional<Vec2> track_point(const std::vector<Level>& pa, const std::vector<Level>& pb, double u0, double v0,
                                       const FlowEstimatorConfig& cfg, TrackScratch& scratch) {
  const int levels = static_cast<int>(pa.size());
  const int half = cfg.window / 2;
  const int area = cfg.window * cfg.window;
  const auto sz = static_cast<std::size_t>(area);
  scratch.tmpl.resize(sz);
  scratch.gu.resize(sz);
  scratch.gv.resize(sz);
  scratch.warped.resize(sz);
  double* const tmpl = scratch.tmpl.data();
  double* const gu = scratch.gu.data();
  double* const gv = scratch.gv.data();
  double* const warped = scratch.warped.data();
  Vec2 guess = Vec2::Zero();
  for (int l = levels - 1; l >= 0; --l) {
    const auto& la = pa[static_cast<std::size_t>(l)];
    const auto& lb = pb[static_cast<std::size_t>(l)];
    const double scale = std::ldexp(1.0, -l);
    const double pu = u0 * scale;
    const double pv = v0 * scale;
    sample_window(la.image, pu, pv, half, tmpl);
    sample_window(la.grad_u, pu, pv, half, gu);
    sample_window(la.grad_v, pu, pv, half, gv);
    double g11 = 0.0, g12 = 0.0, g22 = 0.0;
    for (int i = 0; i < area; ++i) {
      g11 += gu[i] * gu[i];
      g12 += gu[i] * gv[i];
      g22 += gv[i] * gv[i];
    }
    const double det = g11 * g22 - g12 * g12;
    const double min_eig = 0.5 * (g11 + g22 - std::sqrt((g11 - g22) * (g11 - g22) + 4.0 * g12 * g12)) / area;
    if (l == 0 && min_eig < cfg.min_eigenvalue) return std::nullopt;
    Vec2 d = guess;
    if (det > 1e-18) {
      for (int it = 0; it < cfg.iterations; ++it) {
        sample_window(lb.image, pu + d.x(), pv + d.y(), half, warped);
        double b1 = 0.0, b2 = 0.0;
        for (int i = 0; i < area; ++i) {
          const double diff = tmpl[i] - warped[i];
          b1 += diff * gu[i];
          b2 += diff * gv[i];
        }
        const Vec2 step((g22 * b1 - g12 * b2) / det, (g11 * b2 - g12 * b1) / det);
        d += step;
        if (!d.allFinite()) return std::nullopt;
        if (step.squaredNorm() < 1e-4) break;
      }
    }
    guess = l > 0 ? Vec2(2.0 * d) : d;
  }
  return guess;
}

}  // namespace detail

/// Coarse-to-fine iterative Lucas-Kanade at every stride-th pixel. A pixel is valid when its
/// finest-level structure tensor passes the eigenvalue test, its target stays in frame, and
/// tracking back from the target lands within max_fb_error of where it started.
inline FlowField estimate_flow(const ImageBuffer& from, const ImageBuffer& to, const FlowEstimatorConfig& cfg = {}) {
  cfg.validate();
  require_same_size(from.width(), from.height(), to.width(), to.height(), "estimate_flow");
  const auto pyr_from = detail::build_pyramid(from.pixels, cfg.pyramid_levels);
  const auto pyr_to = detail::build_pyramid(to.pixels, static_cast<int>(pyr_from.size()));
  const bool check_fb = std::isfinite(cfg.max_fb_error);

  FlowField flow(from.width(), from.height());
  detail::TrackScratch scratch;
  for (int v0 = 0; v0 < from.height(); v0 += cfg.stride) {
    for (int u0 = 0; u0 < from.width(); u0 += cfg.stride) {
      const auto d = detail::track_point(pyr_from, pyr_to, u0, v0, cfg, scratch);
      if (!d) continue;
      const double tu = u0 + d->x();
      const double tv = v0 + d->y();
      if (!from.intrinsics.contains(tu, tv)) continue;
      if (check_fb) {
        const auto back = detail::track_point(pyr_to, pyr_from, tu, tv, cfg, scratch);
        if (!back || (*d + *back).norm() > cfg.max_fb_error) continue;
      }
      flow.vectors(u0, v0) = *d;
      flow.valid(u0, v0) = 1;
    }
  }
  return flow;
}

}  // namespace i2s::flow
