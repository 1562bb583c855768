#pragma once

#include "i2s/core/geometry.hpp"

#include <stdexcept>

namespace i2s::ibvs {

using Row6 = Eigen::Matrix<double, 1, 6>;

/// The 2x6 point-feature interaction matrix at normalized image coordinates (x, y) and depth Z.
/// Maps a camera-frame twist [v; w] to the normalized image velocity of a static point.
struct InteractionRow {
  Row6 x_row;
  Row6 y_row;

  Eigen::Matrix<double, 2, 6> matrix() const {
    Eigen::Matrix<double, 2, 6> m;
    m << x_row, y_row;
    return m;
  }
};

inline InteractionRow interaction_row(double x, double y, double z) {
  if (!(z > 0.0)) throw std::invalid_argument("interaction_row: depth must be positive");
  const double iz = 1.0 / z;
  InteractionRow r;
  r.x_row << -iz, 0.0, x * iz, x * y, -(1.0 + x * x), y;
  r.y_row << 0.0, -iz, y * iz, 1.0 + y * y, -x * y, -x;
  return r;
}

}  // namespace i2s::ibvs
