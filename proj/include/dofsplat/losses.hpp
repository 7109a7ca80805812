// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dofsplat/defocus.hpp"
#include "dofsplat/error.hpp"
#include "dofsplat/image.hpp"

namespace dofsplat::losses {

struct LossWeights {
  double lambda_dssim = 0.2;
  double lambda_dssim_dof = 0.2;
  double lambda_geo = 0.05;
  double lambda_depth = 0.005;
  double alpha_depth_corr = 1.0;

  void validate() const {
    require(lambda_dssim >= 0.0 && lambda_dssim <= 1.0, ErrorKind::kInvalidArgument,
            "lambda_dssim must lie in [0,1]");
    require(lambda_dssim_dof >= 0.0 && lambda_dssim_dof <= 1.0, ErrorKind::kInvalidArgument,
            "lambda_dssim_dof must lie in [0,1]");
    require(lambda_geo >= 0.0 && lambda_depth >= 0.0 && alpha_depth_corr >= 0.0,
            ErrorKind::kInvalidArgument, "loss weights must be non-negative");
  }
};

inline void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
  require(a.same_shape(b), ErrorKind::kDimensionMismatch,
          "image shapes differ: " + std::to_string(a.width) + "x" + std::to_string(a.height) + "x" +
              std::to_string(a.channels) + " vs " + std::to_string(b.width) + "x" +
              std::to_string(b.height) + "x" + std::to_string(b.channels));
}

/// Mean over pixels of the channel-summed absolute difference.
inline double l1_loss(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    sum += std::abs(static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]));
  }
  return sum / static_cast<double>(a.pixel_count());
}

struct SsimOptions {
  int window = 11;
  double window_sigma = 1.5;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
};

namespace detail {

/// Valid-mode separable filtering of a single-channel plane.
inline std::vector<double> filter_valid(const std::vector<double>& plane, int W, int H,
                                        const std::vector<double>& taps) {
  const int n = static_cast<int>(taps.size());
  const int Wo = W - n + 1, Ho = H - n + 1;
  std::vector<double> horiz(static_cast<std::size_t>(Wo) * H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < Wo; ++x) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += taps[k] * plane[static_cast<std::size_t>(y) * W + x + k];
      horiz[static_cast<std::size_t>(y) * Wo + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(Wo) * Ho);
  for (int y = 0; y < Ho; ++y) {
    for (int x = 0; x < Wo; ++x) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += taps[k] * horiz[static_cast<std::size_t>(y + k) * Wo + x];
      out[static_cast<std::size_t>(y) * Wo + x] = acc;
    }
  }
  return out;
}

inline std::vector<double> window_taps(int n, double sigma) {
  std::vector<double> taps(n);
  const double c = (n - 1) / 2.0;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    taps[i] = std::exp(-((i - c) * (i - c)) / (2.0 * sigma * sigma));
    s += taps[i];
  }
  for (double& t : taps) t /= s;
  return taps;
}

}  // namespace detail

/// Mean SSIM over every window position fully inside the image, using a
/// gaussian-weighted window and the covariance cross term, averaged over
/// channels.
inline double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimOptions& opt = {}) {
  require_same_shape(a, b);
  require(a.width >= opt.window && a.height >= opt.window, ErrorKind::kInvalidArgument,
          "image smaller than the SSIM window");
  const int W = a.width, H = a.height, C = a.channels;
  const auto taps = detail::window_taps(opt.window, opt.window_sigma);
  const std::size_t n = a.pixel_count();

  double total = 0.0;
  for (int c = 0; c < C; ++c) {
    std::vector<double> pa(n), pb(n), paa(n), pbb(n), pab(n);
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = a.data[i * C + c];
      pb[i] = b.data[i * C + c];
      paa[i] = pa[i] * pa[i];
      pbb[i] = pb[i] * pb[i];
      pab[i] = pa[i] * pb[i];
    }
    const auto mu_a = detail::filter_valid(pa, W, H, taps);
    const auto mu_b = detail::filter_valid(pb, W, H, taps);
    const auto e_aa = detail::filter_valid(paa, W, H, taps);
    const auto e_bb = detail::filter_valid(pbb, W, H, taps);
    const auto e_ab = detail::filter_valid(pab, W, H, taps);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double ma = mu_a[i], mb = mu_b[i];
      const double var_a = e_aa[i] - ma * ma;
      const double var_b = e_bb[i] - mb * mb;
      const double cov = e_ab[i] - ma * mb;
      const double num = (2.0 * ma * mb + opt.c1) * (2.0 * cov + opt.c2);
      const double den = (ma * ma + mb * mb + opt.c1) * (var_a + var_b + opt.c2);
      sum += num / den;
    }
    total += sum / static_cast<double>(mu_a.size());
  }
  return total / C;
}

/// L1, SSIM and their convex mix (1 - lambda) L1 + lambda (1 - SSIM).
struct PhotometricTerms {
  double l1 = 0.0;
  double ssim = 1.0;
  double loss = 0.0;
};

inline PhotometricTerms photometric_terms(const ImageBuffer& rend, const ImageBuffer& gt,
                                          double lambda_dssim) {
  require(lambda_dssim >= 0.0 && lambda_dssim <= 1.0, ErrorKind::kInvalidArgument,
          "lambda_dssim must lie in [0,1]");
  PhotometricTerms t;
  t.l1 = l1_loss(rend, gt);
  t.ssim = ssim(rend, gt);
  t.loss = (1.0 - lambda_dssim) * t.l1 + lambda_dssim * (1.0 - t.ssim);
  return t;
}

inline double rgb_loss(const ImageBuffer& rend, const ImageBuffer& gt, double lambda_dssim) {
  return photometric_terms(rend, gt, lambda_dssim).loss;
}

/// Blurs both images with the same depth-driven kernels (depth should be the
/// aligned prior), then scores the pair like rgb_loss.
inline PhotometricTerms dof_terms(const ImageBuffer& rend, const ImageBuffer& gt,
                                  const DepthMap& depth, const optics::LensSpec& lens, double d_f,
                                  const kernels::KernelSpec& spec, double lambda_dssim_dof,
                                  int threads = 1) {
  require_same_shape(rend, gt);
  require(rend.width == depth.width && rend.height == depth.height, ErrorKind::kDimensionMismatch,
          "image and depth dimensions differ");
  const auto plan = defocus::make_plan(depth, lens, d_f, spec);
  const ImageBuffer rend_dof = defocus::apply_plan(rend, plan, spec, threads);
  const ImageBuffer gt_dof = defocus::apply_plan(gt, plan, spec, threads);
  return photometric_terms(rend_dof, gt_dof, lambda_dssim_dof);
}

inline double dof_loss(const ImageBuffer& rend, const ImageBuffer& gt, const DepthMap& depth,
                       const optics::LensSpec& lens, double d_f, const kernels::KernelSpec& spec,
                       double lambda_dssim_dof, int threads = 1) {
  return dof_terms(rend, gt, depth, lens, d_f, spec, lambda_dssim_dof, threads).loss;
}

/// Individually evaluated loss terms; absent terms stay empty.
struct LossComponents {
  std::optional<PhotometricTerms> rgb;
  std::optional<PhotometricTerms> dof;
  std::optional<double> geo;
  std::optional<double> depth;
};

struct LossReport {
  std::optional<double> l1_rgb, ssim_rgb, L_rgb;
  std::optional<double> l1_dof, ssim_dof, L_dof;
  std::optional<double> L_geo, L_depth;
  double L_total = 0.0;
  /// True when some term was absent and L_total covers only present terms.
  bool partial = false;
};

inline LossReport total_loss(const LossComponents& parts, const LossWeights& weights) {
  weights.validate();
  auto finite = [](double v, const char* name) {
    require(std::isfinite(v), ErrorKind::kNumerical, std::string("non-finite loss component ") + name);
    return v;
  };
  LossReport r;
  if (parts.rgb) {
    r.l1_rgb = finite(parts.rgb->l1, "l1_rgb");
    r.ssim_rgb = finite(parts.rgb->ssim, "ssim_rgb");
    r.L_rgb = finite(parts.rgb->loss, "L_rgb");
    r.L_total += *r.L_rgb;
  }
  if (parts.dof) {
    r.l1_dof = finite(parts.dof->l1, "l1_dof");
    r.ssim_dof = finite(parts.dof->ssim, "ssim_dof");
    r.L_dof = finite(parts.dof->loss, "L_dof");
    r.L_total += *r.L_dof;
  }
  if (parts.geo) {
    r.L_geo = finite(*parts.geo, "L_geo");
    r.L_total += weights.lambda_geo * *r.L_geo;
  }
  if (parts.depth) {
    r.L_depth = finite(*parts.depth, "L_depth");
    r.L_total += weights.lambda_depth * *r.L_depth;
  }
  r.partial = !(parts.rgb && parts.dof && parts.geo && parts.depth);
  return r;
}

/// Scalar-component overload: every term present.
inline LossReport total_loss(double L_rgb, double L_dof, double L_geo, double L_depth,
                             const LossWeights& weights) {
  LossComponents parts;
  parts.rgb = PhotometricTerms{0.0, 1.0, L_rgb};
  parts.dof = PhotometricTerms{0.0, 1.0, L_dof};
  parts.geo = L_geo;
  parts.depth = L_depth;
  LossReport r = total_loss(parts, weights);
  r.l1_rgb.reset();
  r.ssim_rgb.reset();
  r.l1_dof.reset();
  r.ssim_dof.reset();
  return r;
}

inline nlohmann::json to_json(const LossReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"l1_rgb", opt(r.l1_rgb)},   {"ssim_rgb", opt(r.ssim_rgb)}, {"L_rgb", opt(r.L_rgb)},
          {"l1_dof", opt(r.l1_dof)},   {"ssim_dof", opt(r.ssim_dof)}, {"L_dof", opt(r.L_dof)},
          {"L_geo", opt(r.L_geo)},     {"L_depth", opt(r.L_depth)},   {"L_total", r.L_total},
          {"partial", r.partial}};
}

}  // namespace dofsplat::losses
