// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dofsplat/fixtures.hpp"
#include "dofsplat/optics.hpp"

namespace dofsplat::optics {
namespace {

DepthMap from_values(const std::vector<float>& v) {
  DepthMap d(static_cast<int>(v.size()), 1);
  d.data = v;
  return d;
}

TEST(CocDiameter, ZeroOnFocusPlane) {
  const LensSpec lens;
  EXPECT_EQ(coc_diameter(lens, 2.0, 2.0), 0.0);
  for (double d_f : {0.3, 1.0, 7.5, 120.0}) EXPECT_EQ(coc_diameter(lens, d_f, d_f), 0.0);
}

TEST(CocDiameter, MatchesHandArithmetic) {
  const LensSpec lens{0.05, 5.6, 0.036, 1920};
  // f^2 = 0.0025, |d - d_f| = 2, F d = 22.4, d_f - f = 1.95
  const double expected = 0.0025 * 2.0 / (5.6 * 4.0 * 1.95);
  EXPECT_NEAR(coc_diameter(lens, 4.0, 2.0), expected, 1e-9 * expected);
  EXPECT_NEAR(coc_diameter(lens, 4.0, 2.0), 1.1446e-4, 1e-8);
}

TEST(CocDiameter, MonotoneOnEachSideOfFocus) {
  const LensSpec lens;
  const double d_f = 5.0;
  double prev_far = 0.0;
  for (double d = d_f; d <= 100.0; d += 0.05) {
    const double c = coc_diameter(lens, d, d_f);
    EXPECT_GE(c, prev_far);
    prev_far = c;
  }
  double prev_near = 0.0;
  for (double d = d_f; d >= 0.5; d -= 0.01) {
    const double c = coc_diameter(lens, d, d_f);
    EXPECT_GE(c, prev_near);
    prev_near = c;
  }
}

TEST(CocDiameter, RejectsDegenerateConfigurations) {
  const LensSpec lens;
  EXPECT_THROW(coc_diameter(lens, 0.0, 2.0), Error);
  EXPECT_THROW(coc_diameter(lens, -1.0, 2.0), Error);
  EXPECT_THROW(coc_diameter(lens, 1.0, 0.05), Error);
  EXPECT_THROW(coc_diameter(lens, 1.0, 0.01), Error);
  LensSpec bad;
  bad.f_number = 0.0;
  EXPECT_THROW(coc_diameter(bad, 1.0, 2.0), Error);
  bad = LensSpec{};
  bad.image_width = 0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(CocPixels, ConvertsWithSensorRatio) {
  const LensSpec lens{0.05, 5.6, 0.036, 1920};
  EXPECT_EQ(coc_pixels(lens, 2.0, 2.0), 0.0);
  const double coc_m = 0.0025 * 2.0 / (5.6 * 4.0 * 1.95);
  EXPECT_NEAR(coc_pixels(lens, 4.0, 2.0), coc_m * 1920.0 / 0.036, 1e-9);
  // 6.104 px is the rounded 1.1446e-4 m figure converted; exact arithmetic gives 6.1050.
  EXPECT_NEAR(coc_pixels(lens, 4.0, 2.0), 6.104, 1.5e-3);
}

TEST(CocPixels, HomogeneousInImageAndSensorWidth) {
  LensSpec lens;
  const double base = coc_pixels(lens, 9.0, 3.0);
  lens.image_width *= 2;
  EXPECT_NEAR(coc_pixels(lens, 9.0, 3.0), 2.0 * base, 1e-12);
  lens = LensSpec{};
  lens.sensor_width *= 4.0;
  EXPECT_NEAR(coc_pixels(lens, 9.0, 3.0), base / 4.0, 1e-12);
}

TEST(FocusStats, ConstantMap) {
  const FocusStats s = focus_stats(DepthMap(4, 3, 5.0f));
  EXPECT_EQ(s.d_one_third, 5.0);
  EXPECT_EQ(s.d_median, 5.0);
  EXPECT_EQ(s.d_two_thirds, 5.0);
  EXPECT_EQ(s.d_mean, 5.0);
}

TEST(FocusStats, HandOrderStatistics) {
  const FocusStats s = focus_stats(from_values({6, 2, 4, 1, 5, 3}));
  EXPECT_DOUBLE_EQ(s.d_median, 3.5);
  EXPECT_DOUBLE_EQ(s.d_mean, 3.5);
  // Linear interpolation at position (n-1) q: 5/3 and 10/3.
  EXPECT_DOUBLE_EQ(s.d_one_third, 2.0 + 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.d_two_thirds, 4.0 + 1.0 / 3.0);
  EXPECT_LE(s.d_one_third, s.d_median);
  EXPECT_LE(s.d_median, s.d_two_thirds);
}

TEST(FocusStats, IgnoresInvalidPixels) {
  const FocusStats a = focus_stats(from_values({1, 2, 3, 4, 5, 6}));
  const FocusStats b = focus_stats(from_values({0, 1, -3, 2, 3, 0, 4, 5, 6, 0}));
  EXPECT_EQ(a.d_median, b.d_median);
  EXPECT_EQ(a.d_one_third, b.d_one_third);
  EXPECT_EQ(a.d_two_thirds, b.d_two_thirds);
  EXPECT_EQ(a.d_mean, b.d_mean);
  EXPECT_EQ(b.count, 6u);
}

TEST(FocusStats, NoValidPixelsIsAnError) {
  EXPECT_THROW(focus_stats(DepthMap(3, 3)), Error);
  EXPECT_THROW(optimize_focus(DepthMap(3, 3), FocusStrategy::kMedian), Error);
}

TEST(OptimizeFocus, NamedStrategies) {
  const DepthMap d = from_values({1, 2, 3, 4, 5, 6});
  EXPECT_DOUBLE_EQ(optimize_focus(d, FocusStrategy::kMedian), 3.5);
  EXPECT_DOUBLE_EQ(optimize_focus(d, FocusStrategy::kMean), 3.5);
  EXPECT_DOUBLE_EQ(optimize_focus(d, FocusStrategy::kOneThird), 2.0 + 2.0 / 3.0);
  for (auto s : {FocusStrategy::kMedian, FocusStrategy::kOneThird, FocusStrategy::kTwoThirds,
                 FocusStrategy::kMean, FocusStrategy::kArgmin}) {
    EXPECT_EQ(optimize_focus(DepthMap(2, 2, 5.0f), s), 5.0);
  }
}

TEST(OptimizeFocus, ArgminPicksCandidateClosestToMean) {
  fixtures::Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<float> v(40);
    for (float& x : v) x = static_cast<float>(std::exp(rng.uniform(-1.0, 3.0)));  // skewed
    const DepthMap d = from_values(v);
    const FocusStats s = focus_stats(d);
    // Sum of squares about c equals n var + n (mean - c)^2.
    std::vector<double> cands = {s.d_one_third, s.d_median, s.d_two_thirds, s.d_mean};
    const double best = *std::min_element(cands.begin(), cands.end(), [&](double a, double b) {
      return std::abs(a - s.d_mean) < std::abs(b - s.d_mean);
    });
    EXPECT_DOUBLE_EQ(optimize_focus(d, FocusStrategy::kArgmin), best);
  }
}

TEST(OptimizeFocus, StaysWithinDepthRange) {
  fixtures::Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<float> v(25);
    for (float& x : v) x = rng.unit() < 0.2 ? 0.0f : static_cast<float>(rng.uniform(0.5, 50.0));
    v[0] = 1.0f;
    const DepthMap d = from_values(v);
    const FocusStats s = focus_stats(d);
    for (auto st : {FocusStrategy::kMedian, FocusStrategy::kOneThird, FocusStrategy::kTwoThirds,
                    FocusStrategy::kMean, FocusStrategy::kArgmin}) {
      const double f = optimize_focus(d, st);
      EXPECT_GE(f, s.d_min);
      EXPECT_LE(f, s.d_max);
    }
  }
}

TEST(FocusStrategy, ParseRoundTrip) {
  for (auto s : {FocusStrategy::kMedian, FocusStrategy::kOneThird, FocusStrategy::kTwoThirds,
                 FocusStrategy::kMean, FocusStrategy::kArgmin}) {
    EXPECT_EQ(parse_focus_strategy(to_string(s)), s);
  }
  EXPECT_THROW(parse_focus_strategy("mode"), Error);
}

TEST(LensSpec, DefaultsAreStandardFullFrame) {
  const LensSpec lens;
  EXPECT_EQ(lens.focal_length, 0.050);
  EXPECT_EQ(lens.f_number, 5.6);
  EXPECT_EQ(lens.sensor_width, 0.036);
}

}  // namespace
}  // namespace dofsplat::optics
