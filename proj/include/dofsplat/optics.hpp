// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "dofsplat/error.hpp"
#include "dofsplat/image.hpp"
#include "dofsplat/quantile.hpp"

namespace dofsplat::optics {

/// Thin-lens camera. Defaults: 50 mm lens at f/5.6 on a 36 mm full-frame
/// sensor.
struct LensSpec {
  double focal_length = 0.050;  // m
  double f_number = 5.6;
  double sensor_width = 0.036;  // m
  int image_width = 1920;       // px

  void validate() const {
    require(focal_length > 0.0 && std::isfinite(focal_length), ErrorKind::kInvalidArgument,
            "focal_length must be positive");
    require(f_number > 0.0 && std::isfinite(f_number), ErrorKind::kInvalidArgument,
            "f_number must be positive");
    require(sensor_width > 0.0 && std::isfinite(sensor_width), ErrorKind::kInvalidArgument,
            "sensor_width must be positive");
    require(image_width >= 1, ErrorKind::kInvalidArgument, "image_width must be >= 1");
  }
};

/// Circle-of-confusion diameter on the sensor, in meters:
///   f^2 |d - d_f| / (F d (d_f - f)).
inline double coc_diameter(const LensSpec& lens, double d, double d_f) {
  lens.validate();
  require(d > 0.0 && std::isfinite(d), ErrorKind::kInvalidArgument, "object distance must be positive");
  require(d_f > lens.focal_length && std::isfinite(d_f), ErrorKind::kInvalidArgument,
          "focus distance must exceed the focal length");
  const double f = lens.focal_length;
  return f * f * std::abs(d - d_f) / (lens.f_number * d * (d_f - f));
}

inline double coc_pixels(const LensSpec& lens, double d, double d_f) {
  return coc_diameter(lens, d, d_f) * static_cast<double>(lens.image_width) / lens.sensor_width;
}

/// Terciles, median and mean of the valid depths.
struct FocusStats {
  double d_one_third = 0.0;
  double d_median = 0.0;
  double d_two_thirds = 0.0;
  double d_mean = 0.0;
  double d_min = 0.0;
  double d_max = 0.0;
  std::size_t count = 0;
};

inline std::vector<double> sorted_valid_depths(const DepthMap& depth) {
  std::vector<double> v;
  v.reserve(depth.data.size());
  for (float d : depth.data) {
    if (DepthMap::is_valid_value(d)) v.push_back(d);
  }
  std::sort(v.begin(), v.end());
  return v;
}

inline FocusStats focus_stats(const DepthMap& depth) {
  const std::vector<double> v = sorted_valid_depths(depth);
  require(!v.empty(), ErrorKind::kDegenerate, "depth map has no valid pixels");
  FocusStats s;
  s.d_one_third = quantile_sorted(v, 1.0 / 3.0);
  s.d_median = quantile_sorted(v, 0.5);
  s.d_two_thirds = quantile_sorted(v, 2.0 / 3.0);
  double sum = 0.0;
  for (double d : v) sum += d;
  s.d_mean = sum / static_cast<double>(v.size());
  s.d_min = v.front();
  s.d_max = v.back();
  s.count = v.size();
  return s;
}

enum class FocusStrategy { kMedian, kOneThird, kTwoThirds, kMean, kArgmin };

inline FocusStrategy parse_focus_strategy(std::string_view s) {
  if (s == "median") return FocusStrategy::kMedian;
  if (s == "one_third") return FocusStrategy::kOneThird;
  if (s == "two_thirds") return FocusStrategy::kTwoThirds;
  if (s == "mean") return FocusStrategy::kMean;
  if (s == "argmin") return FocusStrategy::kArgmin;
  fail(ErrorKind::kInvalidArgument, "unknown focus strategy '" + std::string(s) + "'");
}

inline const char* to_string(FocusStrategy s) {
  switch (s) {
    case FocusStrategy::kMedian: return "median";
    case FocusStrategy::kOneThird: return "one_third";
    case FocusStrategy::kTwoThirds: return "two_thirds";
    case FocusStrategy::kMean: return "mean";
    case FocusStrategy::kArgmin: return "argmin";
  }
  return "median";
}

/// Picks the focus distance from the depth statistics. `kArgmin` scores the
/// four candidates by sum of squared depth deviations (uniform weights) and
/// takes the smallest, preferring the nearer candidate on ties.
inline double optimize_focus(const DepthMap& depth, FocusStrategy strategy) {
  const FocusStats s = focus_stats(depth);
  switch (strategy) {
    case FocusStrategy::kMedian: return s.d_median;
    case FocusStrategy::kOneThird: return s.d_one_third;
    case FocusStrategy::kTwoThirds: return s.d_two_thirds;
    case FocusStrategy::kMean: return s.d_mean;
    case FocusStrategy::kArgmin: break;
  }
  std::vector<double> candidates = {s.d_one_third, s.d_median, s.d_two_thirds, s.d_mean};
  std::sort(candidates.begin(), candidates.end());
  double best = candidates.front();
  double best_cost = std::numeric_limits<double>::infinity();
  for (double c : candidates) {
    double cost = 0.0;
    for (float d : depth.data) {
      if (!DepthMap::is_valid_value(d)) continue;
      const double r = static_cast<double>(d) - c;
      cost += r * r;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = c;
    }
  }
  return best;
}

}  // namespace dofsplat::optics
