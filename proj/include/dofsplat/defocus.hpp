// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "dofsplat/error.hpp"
#include "dofsplat/image.hpp"
#include "dofsplat/kernels.hpp"
#include "dofsplat/optics.hpp"
#include "dofsplat/parallel.hpp"

namespace dofsplat::defocus {

/// Per-pixel CoC diameter in pixels; invalid-depth pixels carry 0.
struct CocMap {
  int width = 0;
  int height = 0;
  std::vector<double> coc;

  double at(int x, int y) const { return coc[static_cast<std::size_t>(y) * width + x]; }
};

/// Per-pixel kernel radius in [0, r_max].
struct RadiusPlan {
  int width = 0;
  int height = 0;
  int r_max = 0;
  std::vector<int> radius;

  int at(int x, int y) const { return radius[static_cast<std::size_t>(y) * width + x]; }

  /// histogram[r] = number of pixels with radius r, for r in [0, r_max].
  std::vector<std::size_t> histogram() const {
    std::vector<std::size_t> h(static_cast<std::size_t>(r_max) + 1, 0);
    for (int r : radius) ++h[r];
    return h;
  }
};

/// Per-pixel gaussian sigma field.
struct SigmaPlan {
  int width = 0;
  int height = 0;
  std::vector<double> sigma;

  double at(int x, int y) const { return sigma[static_cast<std::size_t>(y) * width + x]; }
};

inline CocMap coc_map(const optics::LensSpec& lens, const DepthMap& depth, double d_f) {
  lens.validate();
  require(d_f > lens.focal_length && std::isfinite(d_f), ErrorKind::kInvalidArgument,
          "focus distance must exceed the focal length");
  CocMap m{depth.width, depth.height, std::vector<double>(depth.pixel_count(), 0.0)};
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    if (depth.valid_index(i)) m.coc[i] = optics::coc_pixels(lens, depth.data[i], d_f);
  }
  return m;
}

/// radius = min(round(CoC / 2), r_max), ties to even.
inline int radius_for_coc(double coc_px, int r_max) {
  const double r = std::nearbyint(coc_px / 2.0);
  return static_cast<int>(std::min<double>(r, r_max));
}

inline RadiusPlan plan_radii(const CocMap& coc, int r_max) {
  require(r_max >= 0, ErrorKind::kInvalidArgument, "r_max must be >= 0");
  RadiusPlan plan{coc.width, coc.height, r_max, std::vector<int>(coc.coc.size(), 0)};
  for (std::size_t i = 0; i < coc.coc.size(); ++i) plan.radius[i] = radius_for_coc(coc.coc[i], r_max);
  return plan;
}

inline SigmaPlan plan_sigmas(const CocMap& coc, double k_s) {
  SigmaPlan plan{coc.width, coc.height, std::vector<double>(coc.coc.size(), 0.0)};
  for (std::size_t i = 0; i < coc.coc.size(); ++i) plan.sigma[i] = kernels::sigma_from_coc(coc.coc[i], k_s);
  return plan;
}

/// Everything derived from the optics for one defocus pass.
struct DefocusPlan {
  double focus_distance = 0.0;
  CocMap coc;
  RadiusPlan radii;
  SigmaPlan sigmas;
};

inline DefocusPlan make_plan(const DepthMap& depth, const optics::LensSpec& lens, double d_f,
                             const kernels::KernelSpec& spec) {
  spec.validate();
  DefocusPlan p;
  p.focus_distance = d_f;
  p.coc = coc_map(lens, depth, d_f);
  p.radii = plan_radii(p.coc, spec.max_radius);
  p.sigmas = plan_sigmas(p.coc, spec.k_s);
  return p;
}

namespace detail {

inline int clamp_index(int v, int n) { return std::clamp(v, 0, n - 1); }

inline float clip01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

}  // namespace detail

/// Gather-form spatially varying blur: each output pixel p sums
/// I(q) * K_p(p - q) over its window, where K_p is chosen by p's own radius
/// (and sigma for the gaussian family). Radius-0 pixels copy the input;
/// borders are clamp-to-edge; results are clipped to [0,1].
inline ImageBuffer apply_plan(const ImageBuffer& image, const DefocusPlan& plan,
                              const kernels::KernelSpec& spec, int threads = 1) {
  require(image.width == plan.radii.width && image.height == plan.radii.height,
          ErrorKind::kDimensionMismatch, "image and depth dimensions differ");
  ImageBuffer out = image;
  kernels::KernelCache cache;
  const int W = image.width, H = image.height, C = image.channels;
  parallel_for(static_cast<std::size_t>(H), threads, [&](std::size_t y0, std::size_t y1) {
    std::vector<double> acc(C);
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < W; ++x) {
        const int r = plan.radii.at(x, y);
        if (r == 0) continue;
        const auto kernel = cache.get(spec, r, plan.sigmas.at(x, y));
        std::fill(acc.begin(), acc.end(), 0.0);
        // q = p - offset, weight K(offset)
        for (int oy = -r; oy <= r; ++oy) {
          const int qy = detail::clamp_index(y - oy, H);
          for (int ox = -r; ox <= r; ++ox) {
            const int qx = detail::clamp_index(x - ox, W);
            const double w = kernel->at(ox, oy);
            for (int c = 0; c < C; ++c) acc[c] += w * image.at(qx, qy, c);
          }
        }
        for (int c = 0; c < C; ++c) out.at(x, y, c) = detail::clip01(acc[c]);
      }
    }
  });
  return out;
}

inline ImageBuffer synthesize_defocus(const ImageBuffer& image, const DepthMap& depth,
                                      const optics::LensSpec& lens, double d_f,
                                      const kernels::KernelSpec& spec, int threads = 1) {
  require(image.width == depth.width && image.height == depth.height,
          ErrorKind::kDimensionMismatch, "image and depth dimensions differ");
  return apply_plan(image, make_plan(depth, lens, d_f, spec), spec, threads);
}

/// Gaussian-only fast path: a horizontal then a vertical 1D pass, both using
/// the output pixel's radius and sigma. Matches the 2D gaussian exactly where
/// sigma is spatially constant; approximate where it varies.
inline ImageBuffer separable_defocus(const ImageBuffer& image, const RadiusPlan& radii,
                                     const SigmaPlan& sigmas, int threads = 1) {
  require(image.width == radii.width && image.height == radii.height &&
              sigmas.width == radii.width && sigmas.height == radii.height,
          ErrorKind::kDimensionMismatch, "image, radius plan and sigma plan dimensions differ");
  const int W = image.width, H = image.height, C = image.channels;

  auto taps_for = [&](int x, int y, int& r) {
    r = radii.at(x, y);
    const double s = sigmas.at(x, y);
    if (r == 0 || !(s > 0.0)) {
      r = 0;
      return std::vector<double>{1.0};
    }
    return kernels::gaussian_taps(s, r);
  };

  std::vector<double> tmp(image.data.size());
  parallel_for(static_cast<std::size_t>(H), threads, [&](std::size_t y0, std::size_t y1) {
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < W; ++x) {
        int r = 0;
        const auto taps = taps_for(x, y, r);
        for (int c = 0; c < C; ++c) {
          double acc = 0.0;
          for (int o = -r; o <= r; ++o) acc += taps[o + r] * image.at(detail::clamp_index(x - o, W), y, c);
          tmp[(static_cast<std::size_t>(y) * W + x) * C + c] = acc;
        }
      }
    }
  });

  ImageBuffer out = image;
  parallel_for(static_cast<std::size_t>(H), threads, [&](std::size_t y0, std::size_t y1) {
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < W; ++x) {
        int r = 0;
        const auto taps = taps_for(x, y, r);
        if (r == 0) continue;
        for (int c = 0; c < C; ++c) {
          double acc = 0.0;
          for (int o = -r; o <= r; ++o) {
            acc += taps[o + r] * tmp[(static_cast<std::size_t>(detail::clamp_index(y - o, H)) * W + x) * C + c];
          }
          out.at(x, y, c) = detail::clip01(acc);
        }
      }
    }
  });
  return out;
}

inline ImageBuffer separable_defocus(const ImageBuffer& image, const DepthMap& depth,
                                     const optics::LensSpec& lens, double d_f,
                                     const kernels::KernelSpec& spec, int threads = 1) {
  require(spec.family == kernels::Family::kGaussian, ErrorKind::kInvalidArgument,
          "separable defocus is only exact for the gaussian family");
  require(image.width == depth.width && image.height == depth.height,
          ErrorKind::kDimensionMismatch, "image and depth dimensions differ");
  const DefocusPlan plan = make_plan(depth, lens, d_f, spec);
  return separable_defocus(image, plan.radii, plan.sigmas, threads);
}

}  // namespace dofsplat::defocus
