#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace i2s::sim {

/// Procedural surface texture: a checkerboard plus octaves of smooth value noise.
/// Coordinates are meters in the quad's own frame.
struct TextureParams {
  double checker_period = 0.25;  // meters per checker cell
  double noise_scale = 0.6;      // meters, wavelength of the coarse octave
  std::uint64_t noise_seed = 1;
  double base = 0.5;
  double contrast = 0.4;

  bool operator==(const TextureParams&) const = default;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline double lattice_value(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
  const std::uint64_t h = mix64(static_cast<std::uint64_t>(ix) * 0x9e3779b97f4a7c15ULL ^
                                mix64(static_cast<std::uint64_t>(iy) + 0x632be59bd9b4e019ULL) ^
                                mix64(seed));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

/// Smooth value noise in [0, 1].
inline double value_noise(double x, double y, std::uint64_t seed) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const double tx = fade(x - fx);
  const double ty = fade(y - fy);
  const double v00 = lattice_value(ix, iy, seed);
  const double v10 = lattice_value(ix + 1, iy, seed);
  const double v01 = lattice_value(ix, iy + 1, seed);
  const double v11 = lattice_value(ix + 1, iy + 1, seed);
  const double a = v00 + (v10 - v00) * tx;
  const double b = v01 + (v11 - v01) * tx;
  return a + (b - a) * ty;
}

/// Square wave (+1 on even cells, -1 on odd cells of unit width) averaged over a box of width w.
inline double filtered_square(double t, double w) {
  const auto tri = [](double s) { return std::abs(s * 0.5 - std::floor(s * 0.5) - 0.5); };
  if (w < 1e-6) return (static_cast<std::int64_t>(std::floor(t)) & 1) ? -1.0 : 1.0;
  return 2.0 * (tri(t - 0.5 * w) - tri(t + 0.5 * w)) / w;
}

}  // namespace detail

/// Response of a Gaussian pixel filter (std sigma, meters) at the given wavelength.
inline double filter_gain(double sigma, double wavelength) {
  const double r = sigma / wavelength;
  return std::exp(-2.0 * 9.869604401089358 * r * r);
}

/// Unquantized intensity in [0, 1] at quad coordinates (x, y) meters. A positive footprint
/// (meters per pixel on the surface) attenuates each component by its filtered response, so
/// distant or grazing surfaces fade toward the mean instead of aliasing.
inline double texture_intensity(const TextureParams& tex, double x, double y, double footprint = 0.0) {
  const double sigma = 0.5 * footprint;
  const double p = tex.checker_period;
  const double checker = detail::filtered_square(x / p, footprint / p) * detail::filtered_square(y / p, footprint / p);
  // four noise octaves; the finer ones only survive the filter at close range
  static constexpr double kScale[4] = {1.0, 0.4, 0.16, 0.064};
  static constexpr double kWeight[4] = {0.4, 0.25, 0.2, 0.15};
  double noise = 0.0;
  for (int o = 0; o < 4; ++o) {
    const double s = kScale[o] * tex.noise_scale;
    const double n = 2.0 * detail::value_noise(x / s, y / s, tex.noise_seed ^ (0x9e3779b97f4a7c15ULL * o)) - 1.0;
    noise += kWeight[o] * filter_gain(sigma, 2.0 * s) * n;
  }
  const double pattern = 0.15 * checker + 0.85 * noise;
  return std::clamp(tex.base + tex.contrast * pattern, 0.0, 1.0);
}

}  // namespace i2s::sim
