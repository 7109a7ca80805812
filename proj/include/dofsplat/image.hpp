// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dofsplat/error.hpp"

namespace dofsplat {

/// Row-major image with 1 or 3 interleaved channels, values in [0,1].
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  float& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool same_shape(const ImageBuffer& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }

  void validate() const {
    require(width > 0 && height > 0, ErrorKind::kInvalidArgument, "image has zero extent");
    require(channels == 1 || channels == 3, ErrorKind::kInvalidArgument,
            "image must have 1 or 3 channels");
    require(data.size() == pixel_count() * channels, ErrorKind::kInvalidArgument,
            "image data length does not match width*height*channels");
    for (float v : data) {
      require(std::isfinite(v) && v >= 0.0f && v <= 1.0f, ErrorKind::kInvalidArgument,
              "image value outside [0,1]");
    }
  }
};

/// Metric depth raster. Entries <= 0 or non-finite are invalid; loaders
/// canonicalize invalid entries to kInvalidDepth.
struct DepthMap {
  static constexpr float kInvalidDepth = 0.0f;

  int width = 0;
  int height = 0;
  std::vector<float> data;

  DepthMap() = default;
  DepthMap(int w, int h, float fill = kInvalidDepth)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  static bool is_valid_value(float v) { return std::isfinite(v) && v > 0.0f; }
  bool valid(int x, int y) const { return is_valid_value(at(x, y)); }
  bool valid_index(std::size_t i) const { return is_valid_value(data[i]); }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (float v : data) n += is_valid_value(v) ? 1 : 0;
    return n;
  }

  /// Maps every invalid entry to the sentinel.
  void canonicalize() {
    for (float& v : data) {
      if (!is_valid_value(v)) v = kInvalidDepth;
    }
  }

  bool same_shape(const DepthMap& o) const { return width == o.width && height == o.height; }
};

/// Bilinear depth lookup at a fractional pixel position (pixel centers at
/// integer coordinates). Neighbors carrying zero weight are ignored; if any
/// neighbor with non-zero weight is out of bounds or invalid, returns nullopt.
inline std::optional<double> sample_bilinear(const DepthMap& depth, double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) return std::nullopt;
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const double ax = x - fx0;
  const double ay = y - fy0;
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  double acc = 0.0;
  for (int dy = 0; dy <= 1; ++dy) {
    const double wy = dy == 0 ? 1.0 - ay : ay;
    if (wy == 0.0) continue;
    for (int dx = 0; dx <= 1; ++dx) {
      const double wx = dx == 0 ? 1.0 - ax : ax;
      if (wx == 0.0) continue;
      const int xi = x0 + dx;
      const int yi = y0 + dy;
      if (xi < 0 || yi < 0 || xi >= depth.width || yi >= depth.height) return std::nullopt;
      const float v = depth.at(xi, yi);
      if (!DepthMap::is_valid_value(v)) return std::nullopt;
      acc += wx * wy * static_cast<double>(v);
    }
  }
  return acc;
}

}  // namespace dofsplat
