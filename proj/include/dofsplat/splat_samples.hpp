// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dofsplat/error.hpp"

namespace dofsplat {

struct SplatSample {
  float alpha = 0.0f;
  float depth = 0.0f;
};

/// Per-pixel front-to-back sample lists in compressed row storage. The
/// stored order is the compositing order; nothing re-sorts it.
class SplatSampleBuffer {
 public:
  SplatSampleBuffer() = default;
  SplatSampleBuffer(int width, int height)
      : width_(width), height_(height),
        offsets_(static_cast<std::size_t>(width) * height + 1, 0) {}

  /// Builds from one vector per pixel, row-major.
  static SplatSampleBuffer from_lists(int width, int height,
                                      const std::vector<std::vector<SplatSample>>& lists) {
    require(lists.size() == static_cast<std::size_t>(width) * height,
            ErrorKind::kDimensionMismatch, "splat list count != width*height");
    SplatSampleBuffer buf(width, height);
    for (std::size_t i = 0; i < lists.size(); ++i) {
      buf.offsets_[i + 1] = buf.offsets_[i] + lists[i].size();
      buf.samples_.insert(buf.samples_.end(), lists[i].begin(), lists[i].end());
    }
    buf.validate();
    return buf;
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  std::size_t total_samples() const { return samples_.size(); }

  std::span<const SplatSample> pixel(std::size_t index) const {
    return {samples_.data() + offsets_[index], offsets_[index + 1] - offsets_[index]};
  }
  std::span<const SplatSample> pixel(int x, int y) const {
    return pixel(static_cast<std::size_t>(y) * width_ + x);
  }

  void validate() const {
    require(width_ >= 0 && height_ >= 0, ErrorKind::kInvalidArgument, "negative splat buffer extent");
    for (const auto& s : samples_) {
      require(std::isfinite(s.alpha) && s.alpha >= 0.0f && s.alpha <= 1.0f,
              ErrorKind::kInvalidArgument, "splat alpha outside [0,1]");
      require(std::isfinite(s.depth) && s.depth > 0.0f, ErrorKind::kInvalidArgument,
              "splat depth must be positive");
    }
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<SplatSample> samples_;
};

}  // namespace dofsplat
