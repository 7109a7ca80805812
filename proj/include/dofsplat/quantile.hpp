// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dofsplat/error.hpp"

namespace dofsplat {

/// Quantile of an ascending-sorted sample with linear interpolation between
/// order statistics (Hyndman-Fan type 7, the numpy default).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  require(!sorted.empty(), ErrorKind::kDegenerate, "quantile of empty sample");
  require(q >= 0.0 && q <= 1.0, ErrorKind::kInvalidArgument, "quantile level outside [0,1]");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::span<const double> values, double q) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, q);
}

}  // namespace dofsplat
