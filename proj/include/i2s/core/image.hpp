#pragma once

#include "i2s/core/geometry.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace i2s {

/// Pinhole intrinsics. Pixel (u, v) refers to the pixel center.
struct Intrinsics {
  double fx = 100.0;
  double fy = 100.0;
  double cx = 63.5;
  double cy = 47.5;
  int width = 128;
  int height = 96;

  void validate() const {
    if (!(fx > 0.0 && fy > 0.0)) throw std::invalid_argument("Intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("Intrinsics: empty image size");
    if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height))
      throw std::invalid_argument("Intrinsics: principal point outside the image");
  }

  Vec2 normalize(double u, double v) const { return {(u - cx) / fx, (v - cy) / fy}; }
  Vec2 to_pixel(double x, double y) const { return {x * fx + cx, y * fy + cy}; }
  bool contains(double u, double v) const {
    return u >= -0.5 && v >= -0.5 && u < width - 0.5 && v < height - 0.5;
  }

  bool operator==(const Intrinsics&) const = default;
};

/// Row-major H x W grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
    if (width < 0 || height < 0) throw std::invalid_argument("Grid: negative size");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int u, int v) { return data_[static_cast<std::size_t>(v) * width_ + u]; }
  const T& operator()(int u, int v) const { return data_[static_cast<std::size_t>(v) * width_ + u]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Grayscale intensity image in [0, 1] with its camera model.
struct ImageBuffer {
  Grid<double> pixels;
  Intrinsics intrinsics;

  ImageBuffer() = default;
  explicit ImageBuffer(const Intrinsics& intr, double fill = 0.0)
      : pixels(intr.width, intr.height, fill), intrinsics(intr) {}

  int width() const { return pixels.width(); }
  int height() const { return pixels.height(); }
  double operator()(int u, int v) const { return pixels(u, v); }
  double& operator()(int u, int v) { return pixels(u, v); }

  void validate() const {
    intrinsics.validate();
    if (pixels.width() != intrinsics.width || pixels.height() != intrinsics.height)
      throw std::invalid_argument("ImageBuffer: dimensions do not match intrinsics");
    for (double p : pixels.data())
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ImageBuffer: intensity outside [0,1]");
  }

  bool operator==(const ImageBuffer&) const = default;
};

/// Rounds an intensity to the nearest 8-bit level.
inline double quantize8(double v) {
  return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

/// Mean of the channels, then 8-bit quantized.
inline ImageBuffer from_rgb(const std::vector<std::uint8_t>& rgb, const Intrinsics& intr) {
  if (rgb.size() != static_cast<std::size_t>(intr.width) * intr.height * 3)
    throw std::invalid_argument("from_rgb: buffer size does not match intrinsics");
  ImageBuffer img(intr);
  auto& px = img.pixels.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double mean = (rgb[3 * i] + rgb[3 * i + 1] + rgb[3 * i + 2]) / 3.0;
    px[i] = quantize8(mean / 255.0);
  }
  return img;
}

struct FlowField {
  Grid<Vec2> vectors;
  Grid<std::uint8_t> valid;

  FlowField() = default;
  FlowField(int width, int height) : vectors(width, height, Vec2::Zero()), valid(width, height, 0) {}

  int width() const { return vectors.width(); }
  int height() const { return vectors.height(); }
  bool is_valid(int u, int v) const { return valid(u, v) != 0; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto m : valid.data()) n += m != 0;
    return n;
  }
};

struct DepthMap {
  Grid<double> depths;
  Grid<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(int width, int height) : depths(width, height, 0.0), valid(width, height, 0) {}

  int width() const { return depths.width(); }
  int height() const { return depths.height(); }
  bool is_valid(int u, int v) const { return valid(u, v) != 0; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto m : valid.data()) n += m != 0;
    return n;
  }
};

inline void require_same_size(int w0, int h0, int w1, int h1, const char* what) {
  if (w0 != w1 || h0 != h1) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace i2s
