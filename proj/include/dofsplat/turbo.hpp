// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "dofsplat/image.hpp"

namespace dofsplat {

/// Polynomial fit of the turbo colormap; x is clamped to [0,1].
inline std::array<float, 3> turbo(double x) {
  x = std::clamp(x, 0.0, 1.0);
  const double r = 0.13572138 + x * (4.61539260 + x * (-42.66032258 + x * (132.13108234 + x * (-152.94239396 + x * 59.28637943))));
  const double g = 0.09140261 + x * (2.19418839 + x * (4.84296658 + x * (-14.18503333 + x * (4.27729857 + x * 2.82956604))));
  const double b = 0.10667330 + x * (12.64194608 + x * (-60.58204836 + x * (110.36276771 + x * (-89.90310912 + x * 27.34824973))));
  return {static_cast<float>(std::clamp(r, 0.0, 1.0)), static_cast<float>(std::clamp(g, 0.0, 1.0)),
          static_cast<float>(std::clamp(b, 0.0, 1.0))};
}

inline ImageBuffer turbo_heatmap(int width, int height, const std::vector<float>& values) {
  require(values.size() == static_cast<std::size_t>(width) * height, ErrorKind::kDimensionMismatch,
          "heatmap value count != width*height");
  ImageBuffer img(width, height, 3);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto rgb = turbo(values[i]);
    for (int c = 0; c < 3; ++c) img.data[i * 3 + c] = rgb[c];
  }
  return img;
}

}  // namespace dofsplat
