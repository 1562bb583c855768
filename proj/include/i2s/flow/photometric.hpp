#pragma once

#include "i2s/core/image.hpp"

#include <cmath>

namespace i2s::flow {

/// Mean absolute intensity difference on the 0-255 scale.
inline double photometric_error(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_size(a.width(), a.height(), b.width(), b.height(), "photometric_error");
  const auto& pa = a.pixels.data();
  const auto& pb = b.pixels.data();
  if (pa.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) sum += std::abs(pa[i] - pb[i]);
  return 255.0 * sum / static_cast<double>(pa.size());
}

}  // namespace i2s::flow
