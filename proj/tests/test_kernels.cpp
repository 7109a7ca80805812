// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "dofsplat/fixtures.hpp"
#include "dofsplat/kernels.hpp"
#include "oracles.hpp"

namespace dofsplat::kernels {
namespace {

std::vector<Kernel> all_kernels(int radius, double sigma) {
  return {gaussian_kernel(sigma, radius), smoothstep_kernel(radius), polygonal_kernel(radius, 8)};
}

TEST(SigmaFromCoc, Examples) {
  EXPECT_EQ(sigma_from_coc(0.0, 20.0), 0.0);
  EXPECT_NEAR(sigma_from_coc(6.104, 20.0), 0.3052, 1e-12);
  EXPECT_EQ(sigma_from_coc(20.0, 20.0), 1.0);
  EXPECT_THROW(sigma_from_coc(-1.0, 20.0), Error);
  EXPECT_THROW(sigma_from_coc(1.0, 0.0), Error);
}

TEST(GaussianKernel, ClosedForm3x3Center) {
  const Kernel k = gaussian_kernel(1.0, 1);
  const double expected = 1.0 / (1.0 + 4.0 * std::exp(-0.5) + 4.0 * std::exp(-1.0));
  EXPECT_NEAR(k.at(0, 0), expected, 1e-15);
  EXPECT_NEAR(k.at(1, 0), expected * std::exp(-0.5), 1e-15);
  EXPECT_NEAR(k.at(1, 1), expected * std::exp(-1.0), 1e-15);
}

TEST(GaussianKernel, FlatLimit) {
  const Kernel k = gaussian_kernel(1e4, 1);
  for (double w : k.weights) EXPECT_NEAR(w, 1.0 / 9.0, 1e-3);
}

TEST(GaussianKernel, RejectsZeroSigmaAndRadius) {
  EXPECT_THROW(gaussian_kernel(0.0, 1), Error);
  EXPECT_THROW(gaussian_kernel(1.0, 0), Error);
}

TEST(SmoothStepKernel, PreNormalizationValues) {
  EXPECT_NEAR(smoothstep_profile(0, 0, 3), 0.5 + 0.5 * std::tanh(2.75), 1e-15);
  EXPECT_NEAR(smoothstep_profile(0, 0, 3), 0.99593, 1e-5);
  EXPECT_NEAR(smoothstep_profile(3, 3, 3), 0.5 + 0.5 * std::tanh(-1.75), 1e-15);
  EXPECT_NEAR(smoothstep_profile(3, 3, 3), 0.02931, 1e-5);
  const Kernel k = smoothstep_kernel(3);
  EXPECT_NEAR(k.at(3, 3) / k.at(0, 0), smoothstep_profile(3, 3, 3) / smoothstep_profile(0, 0, 3), 1e-12);
}

TEST(RadialWeight, Examples) {
  EXPECT_EQ(radial_weight(0.0, 3.0), 1.0);
  EXPECT_NEAR(radial_weight(3.0, 3.0), 0.0, 1e-12);
  EXPECT_NEAR(radial_weight(1.5, 3.0), std::cos(std::numbers::pi / 4.0), 1e-15);
  EXPECT_NEAR(radial_weight(1.5, 3.0), 0.70711, 1e-5);
  EXPECT_EQ(radial_weight(3.01, 3.0), 0.0);
}

TEST(PolygonVertices, SquareAngles) {
  const auto v = polygon_vertices(1.0, 4);
  ASSERT_EQ(v.size(), 4u);
  const double angles[4] = {std::numbers::pi / 2, std::numbers::pi, 3 * std::numbers::pi / 2, 2 * std::numbers::pi};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(v[i].x(), std::cos(angles[i]), 1e-15);
    EXPECT_NEAR(v[i].y(), std::sin(angles[i]), 1e-15);
  }
}

TEST(PolygonVertices, OnCircumscribedCircle) {
  for (int n = 3; n <= 12; ++n) {
    for (const auto& p : polygon_vertices(2.5, n)) EXPECT_NEAR(p.norm(), 2.5, 1e-12);
  }
  EXPECT_THROW(polygon_vertices(1.0, 2), Error);
  EXPECT_THROW(polygon_vertices(0.0, 5), Error);
}

TEST(PolygonVertices, DefaultBladeCount) {
  EXPECT_EQ(KernelSpec{}.blades, 8);
  EXPECT_EQ(KernelSpec{}.k_s, 20.0);
  EXPECT_EQ(KernelSpec{}.max_radius, 3);
}

TEST(CrossEdge, Examples) {
  EXPECT_EQ(cross_edge({0, 1}, {0, 0}, {1, 0}), 1.0);
  EXPECT_EQ(cross_edge({0.5, 0}, {0, 0}, {1, 0}), 0.0);
  fixtures::Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Point2 p(rng.normal(), rng.normal()), a(rng.normal(), rng.normal()), b(rng.normal(), rng.normal());
    EXPECT_NEAR(cross_edge(p, a, b), -cross_edge(p, b, a), 1e-12);
  }
}

TEST(PointInPolygon, CenterInsideFarOutside) {
  for (int n = 3; n <= 12; ++n) {
    const auto v = polygon_vertices(1.7, n);
    EXPECT_TRUE(point_in_polygon({0, 0}, v));
    EXPECT_FALSE(point_in_polygon({3.4, 0}, v));
    EXPECT_FALSE(point_in_polygon({0, -3.4}, v));
  }
}

TEST(PointInPolygon, EitherWindingAndBoundary) {
  auto v = polygon_vertices(1.0, 4);
  EXPECT_TRUE(point_in_polygon({0.5, 0.5}, v));  // on the edge (1,0) -> (0,1)
  std::reverse(v.begin(), v.end());
  EXPECT_TRUE(point_in_polygon({0.5, 0.5}, v));
  EXPECT_TRUE(point_in_polygon({1.0, 0.0}, v));  // vertex
  EXPECT_FALSE(point_in_polygon({0.6, 0.6}, v));
}

TEST(PointInPolygon, AgreesWithWindingNumberOracle) {
  fixtures::Rng rng(2024);
  int disagreements = 0, tested = 0;
  for (int n = 3; n <= 12; ++n) {
    const double R = rng.uniform(0.5, 4.0);
    const auto v = polygon_vertices(R, n);
    for (int i = 0; i < 10000; ++i) {
      const Point2 p(rng.uniform(-1.5 * R, 1.5 * R), rng.uniform(-1.5 * R, 1.5 * R));
      double edge = std::numeric_limits<double>::infinity();
      for (int k = 0; k < n; ++k) edge = std::min(edge, oracles::distance_to_segment(p, v[k], v[(k + 1) % n]));
      if (edge < 1e-9 * R) continue;
      ++tested;
      disagreements += point_in_polygon(p, v) != oracles::winding_inside(p, v);
    }
  }
  EXPECT_GT(tested, 99000);
  EXPECT_EQ(disagreements, 0);
}

TEST(PolygonalKernel, CenterMaxAndSupport) {
  const Kernel k = polygonal_kernel(3, 8);
  double max_w = 0.0;
  for (double w : k.weights) max_w = std::max(max_w, w);
  EXPECT_EQ(k.at(0, 0), max_w);
  for (int dy = -3; dy <= 3; ++dy) {
    for (int dx = -3; dx <= 3; ++dx) {
      if (std::hypot(dx, dy) > 3.0) {
        EXPECT_EQ(k.at(dx, dy), 0.0);
      }
    }
  }
  EXPECT_NEAR(k.sum(), 1.0, 1e-12);
}

TEST(PolygonalKernel, ManyBladesApproachDisc) {
  const int r = 3;
  const auto v = polygon_vertices(r, 64);
  int differ = 0, cells = 0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      ++cells;
      const bool disc = dx * dx + dy * dy <= r * r;
      differ += disc != point_in_polygon(Point2(dx, dy), v);
    }
  }
  EXPECT_LT(static_cast<double>(differ) / cells, 0.05);
}

TEST(PolygonalKernel, ZeroGridIsRejectedByNormalization) {
  Kernel k = detail::make_grid(Family::kPolygonal, 1);
  EXPECT_THROW(detail::normalize(k), Error);
  EXPECT_THROW(polygonal_kernel(0, 8), Error);
  EXPECT_THROW(polygonal_kernel(2, 2), Error);
}

TEST(KernelContracts, UnitSumNonNegativeSymmetric) {
  for (int r : {1, 2, 3}) {
    for (double sigma : {0.1, 0.3, 1.0, 3.0}) {
      for (const Kernel& k : all_kernels(r, sigma)) {
        EXPECT_EQ(k.side(), 2 * r + 1);
        EXPECT_NEAR(k.sum(), 1.0, 1e-6);
        for (double w : k.weights) EXPECT_GE(w, 0.0);
        if (k.family == Family::kPolygonal) continue;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            const double w = k.at(dx, dy);
            EXPECT_NEAR(w, k.at(dy, dx), 1e-15);
            EXPECT_NEAR(w, k.at(-dx, dy), 1e-15);
            EXPECT_NEAR(w, k.at(dx, -dy), 1e-15);
          }
        }
      }
    }
  }
}

TEST(MakeKernel, DispatchesOnFamily) {
  KernelSpec spec;
  spec.family = Family::kSmoothStep;
  EXPECT_EQ(make_kernel(spec, 2, 0.0).weights, smoothstep_kernel(2).weights);
  spec.family = Family::kPolygonal;
  spec.blades = 5;
  EXPECT_EQ(make_kernel(spec, 3, 0.0).weights, polygonal_kernel(3, 5).weights);
  spec.family = Family::kGaussian;
  EXPECT_EQ(make_kernel(spec, 3, 0.7).weights, gaussian_kernel(0.7, 3).weights);
  EXPECT_EQ(parse_family("polygonal"), Family::kPolygonal);
  EXPECT_THROW(parse_family("hexagon"), Error);
}

TEST(KernelCache, ConcurrentLookupsAgree) {
  KernelCache cache;
  KernelSpec spec;
  std::vector<std::thread> pool;
  std::vector<int> mismatches(8, 0);
  for (int t = 0; t < 8; ++t) {
    pool.emplace_back([&, t] {
      for (int i = 0; i < 200; ++i) {
        const int r = 1 + (i + t) % 3;
        const double sigma = 0.1 * (1 + (i % 7));
        const auto k = cache.get(spec, r, sigma);
        if (k->weights != gaussian_kernel(sigma, r).weights) ++mismatches[t];
      }
    });
  }
  for (auto& th : pool) th.join();
  for (int m : mismatches) EXPECT_EQ(m, 0);
  EXPECT_EQ(cache.size(), 21u);
}

TEST(KernelCache, CapacityBoundsStorage) {
  KernelCache cache(2);
  KernelSpec spec;
  for (int i = 1; i <= 5; ++i) cache.get(spec, 1, 0.1 * i);
  EXPECT_EQ(cache.size(), 2u);
  EXPECT_EQ(cache.get(spec, 1, 0.5)->weights, gaussian_kernel(0.5, 1).weights);
}

}  // namespace
}  // namespace dofsplat::kernels
