// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference implementations written straight from the closed forms. They
// share no code with the library beyond its plain data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dofsplat/image.hpp"
#include "dofsplat/optics.hpp"
#include "dofsplat/kernels.hpp"
#include "dofsplat/splat_samples.hpp"

namespace dofsplat::oracles {

/// Winding number of the closed polyline around p via summed signed angles.
inline bool winding_inside(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& v) {
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::Vector2d a = v[i] - p, b = v[(i + 1) % v.size()] - p;
    total += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
  }
  return std::abs(total) > std::numbers::pi;
}

inline double distance_to_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

inline double distance_to_boundary(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& v) {
  double d = INFINITY;
  for (std::size_t k = 0; k < v.size(); ++k) d = std::min(d, distance_to_segment(p, v[k], v[(k + 1) % v.size()]));
  return d;
}

/// Thin-lens blur diameter in pixels.
inline double coc_px(const optics::LensSpec& lens, double d, double d_f) {
  const double f = lens.focal_length;
  return f * f * std::abs(d - d_f) / (lens.f_number * d * (d_f - f)) * lens.image_width / lens.sensor_width;
}

/// Row-major (2r+1)^2 normalized weights for one kernel family.
inline std::vector<double> kernel_weights(kernels::Family family, int r, double sigma, int blades) {
  using kernels::Family;
  const int side = 2 * r + 1;
  std::vector<double> w(side * side, 0.0);
  std::vector<Eigen::Vector2d> verts;
  for (int i = 1; i <= blades; ++i) {
    const double a = 2.0 * std::numbers::pi * i / blades;
    verts.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  const auto inside = [&](const Eigen::Vector2d& p) {
    return distance_to_boundary(p, verts) < 1e-9 || winding_inside(p, verts);
  };
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double rho2 = dx * dx + dy * dy;
      double v = 0.0;
      switch (family) {
        case Family::kGaussian: v = std::exp(-rho2 / (2.0 * sigma * sigma)); break;
        case Family::kSmoothStep: v = 0.5 + 0.5 * std::tanh(0.25 * (r * r - rho2) + 0.5); break;
        case Family::kPolygonal: {
          const double rho = std::sqrt(rho2);
          if (rho <= r && inside({double(dx), double(dy)}))
            v = std::max(0.0, std::cos(0.5 * std::numbers::pi * rho / r));
          break;
        }
      }
      w[(dy + r) * side + (dx + r)] = v;
      sum += v;
    }
  }
  for (double& v : w) v /= sum;
  return w;
}

/// Direct gather: out(p) = sum over offsets o of I(clamp(p - o)) K_p(o), with
/// K_p chosen by the output pixel's own depth.
inline ImageBuffer naive_defocus(const ImageBuffer& img, const DepthMap& depth, const optics::LensSpec& lens,
                                 double d_f, const kernels::KernelSpec& spec) {
  ImageBuffer out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!depth.valid(x, y)) continue;
      const double coc = coc_px(lens, depth.at(x, y), d_f);
      const int r = std::min(static_cast<int>(std::nearbyint(coc / 2.0)), spec.max_radius);
      if (r == 0) continue;
      const auto k = kernel_weights(spec.family, r, coc / spec.k_s, spec.blades);
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int oy = -r; oy <= r; ++oy) {
          for (int ox = -r; ox <= r; ++ox) {
            const int qx = std::clamp(x - ox, 0, img.width - 1);
            const int qy = std::clamp(y - oy, 0, img.height - 1);
            acc += img.at(qx, qy, c) * k[(oy + r) * (2 * r + 1) + (ox + r)];
          }
        }
        out.at(x, y, c) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
      }
    }
  }
  return out;
}

/// Back-to-front recursion C_k = a_k d_k + (1 - a_k) C_{k+1}; returns (depth, alpha).
inline std::pair<double, double> composite(std::span<const SplatSample> s) {
  double depth = 0.0, alpha = 0.0;
  for (std::size_t k = s.size(); k-- > 0;) {
    depth = s[k].alpha * double(s[k].depth) + (1.0 - s[k].alpha) * depth;
    alpha = s[k].alpha + (1.0 - s[k].alpha) * alpha;
  }
  return {depth, alpha};
}

/// Plain gradient descent on sum (y - s x - t)^2 + lambda (s^2 + t^2).
inline std::pair<double, double> ridge_by_descent(const std::vector<std::pair<double, double>>& pts, double lambda) {
  double sxx = 0, sx = 0, sxy = 0, sy = 0;
  for (auto [x, y] : pts) sxx += x * x, sx += x, sxy += x * y, sy += y;
  const double n = static_cast<double>(pts.size());
  const double a = sxx + lambda, d = n + lambda;
  const double lmax = 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + sx * sx);
  const double step = 1.0 / lmax;
  double s = 0.0, t = 0.0;
  for (int it = 0; it < 5000000; ++it) {
    const double gs = a * s + sx * t - sxy;
    const double gt = sx * s + d * t - sy;
    s -= step * gs;
    t -= step * gt;
    if (std::hypot(gs, gt) < 1e-12 * std::max(1.0, std::abs(sxy) + std::abs(sy))) break;
  }
  return {s, t};
}

}  // namespace dofsplat::oracles
