// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "dofsplat/error.hpp"

namespace dofsplat::kernels {

enum class Family { kGaussian, kSmoothStep, kPolygonal };

inline Family parse_family(std::string_view s) {
  if (s == "gaussian") return Family::kGaussian;
  if (s == "smoothstep") return Family::kSmoothStep;
  if (s == "polygonal") return Family::kPolygonal;
  fail(ErrorKind::kInvalidArgument, "unknown kernel family '" + std::string(s) + "'");
}

inline const char* to_string(Family f) {
  switch (f) {
    case Family::kGaussian: return "gaussian";
    case Family::kSmoothStep: return "smoothstep";
    case Family::kPolygonal: return "polygonal";
  }
  return "gaussian";
}

/// Blur configuration. `max_radius` caps the per-pixel radius (3 <=> 7x7).
struct KernelSpec {
  Family family = Family::kGaussian;
  int max_radius = 3;
  int blades = 8;
  double k_s = 20.0;

  void validate() const {
    require(max_radius >= 0, ErrorKind::kInvalidArgument, "max_radius must be >= 0");
    require(blades >= 3, ErrorKind::kInvalidArgument, "polygonal kernel needs at least 3 blades");
    require(k_s > 0.0 && std::isfinite(k_s), ErrorKind::kInvalidArgument, "k_s must be positive");
  }
};

/// Square weight grid of side 2*radius+1, row-major, indexed by offset
/// (dx, dy) in [-radius, radius]^2.
struct Kernel {
  Family family = Family::kGaussian;
  int radius = 0;
  std::vector<double> weights;

  int side() const { return 2 * radius + 1; }
  double at(int dx, int dy) const {
    return weights[static_cast<std::size_t>(dy + radius) * side() + (dx + radius)];
  }
  double& at(int dx, int dy) {
    return weights[static_cast<std::size_t>(dy + radius) * side() + (dx + radius)];
  }
  double sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

namespace detail {

inline Kernel make_grid(Family family, int radius) {
  Kernel k;
  k.family = family;
  k.radius = radius;
  k.weights.assign(static_cast<std::size_t>(k.side()) * k.side(), 0.0);
  return k;
}

inline void normalize(Kernel& k) {
  const double s = k.sum();
  require(s > 0.0 && std::isfinite(s), ErrorKind::kDegenerate,
          std::string(to_string(k.family)) + " kernel is identically zero before normalization");
  for (double& w : k.weights) w /= s;
}

}  // namespace detail

inline double sigma_from_coc(double coc_px, double k_s) {
  require(coc_px >= 0.0, ErrorKind::kInvalidArgument, "CoC must be non-negative");
  require(k_s > 0.0, ErrorKind::kInvalidArgument, "k_s must be positive");
  return coc_px / k_s;
}

inline Kernel gaussian_kernel(double sigma, int radius) {
  require(radius >= 1, ErrorKind::kInvalidArgument, "gaussian kernel radius must be >= 1");
  require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::kInvalidArgument,
          "gaussian sigma must be positive; sigma = 0 is the identity blur");
  Kernel k = detail::make_grid(Family::kGaussian, radius);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      k.at(dx, dy) = std::exp(-(dx * dx + dy * dy) * inv);
    }
  }
  detail::normalize(k);
  return k;
}

/// Normalized 1D gaussian taps for offsets [-radius, radius].
inline std::vector<double> gaussian_taps(double sigma, int radius) {
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double s = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-(i * i) * inv);
    s += taps[i + radius];
  }
  for (double& t : taps) t /= s;
  return taps;
}

/// 0.5 + 0.5 tanh(0.25 (r^2 - x^2 - y^2) + 0.5)
inline double smoothstep_profile(double x, double y, double r) {
  return 0.5 + 0.5 * std::tanh(0.25 * (r * r - x * x - y * y) + 0.5);
}

inline Kernel smoothstep_kernel(int radius) {
  require(radius >= 1, ErrorKind::kInvalidArgument, "smoothstep kernel radius must be >= 1");
  Kernel k = detail::make_grid(Family::kSmoothStep, radius);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      k.at(dx, dy) = smoothstep_profile(dx, dy, radius);
    }
  }
  detail::normalize(k);
  return k;
}

/// Cosine attenuation cos(pi/2 * rho/R) on [0, R], zero beyond.
inline double radial_weight(double rho, double R) {
  if (rho > R) return 0.0;
  return std::cos(0.5 * std::numbers::pi * rho / R);
}

using Point2 = Eigen::Vector2d;

/// Regular N-gon inscribed in radius R: v_i = R (cos 2πi/N, sin 2πi/N),
/// i = 1..N. The closing edge v_N -> v_1 is implied.
inline std::vector<Point2> polygon_vertices(double R, int N) {
  require(N >= 3, ErrorKind::kInvalidArgument, "polygon needs at least 3 vertices");
  require(R > 0.0, ErrorKind::kInvalidArgument, "polygon radius must be positive");
  std::vector<Point2> v;
  v.reserve(N);
  for (int i = 1; i <= N; ++i) {
    const double a = 2.0 * std::numbers::pi * i / N;
    v.emplace_back(R * std::cos(a), R * std::sin(a));
  }
  return v;
}

/// Signed area term of p against the directed edge a -> b.
inline double cross_edge(const Point2& p, const Point2& a, const Point2& b) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

/// Containment test for a convex polygon with ordered vertices. The interior
/// sign is taken from the vertex centroid, so either winding works. Points
/// on an edge count as inside.
inline bool point_in_polygon(const Point2& p, const std::vector<Point2>& vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) return false;
  Point2 centroid = Point2::Zero();
  double scale = 0.0;
  for (const auto& v : vertices) {
    centroid += v;
    scale = std::max(scale, v.cwiseAbs().maxCoeff());
  }
  centroid /= static_cast<double>(n);
  const double eps = 1e-12 * std::max(1.0, scale * scale);
  const double orientation = cross_edge(centroid, vertices[0], vertices[1]);
  const double sign = orientation >= 0.0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = sign * cross_edge(p, vertices[i], vertices[(i + 1) % n]);
    if (c < -eps) return false;
  }
  return true;
}

/// H(p) * W(|p|) on integer offsets, normalized.
inline Kernel polygonal_kernel(int radius, int blades) {
  require(radius >= 1, ErrorKind::kInvalidArgument, "polygonal kernel radius must be >= 1");
  require(blades >= 3, ErrorKind::kInvalidArgument, "polygonal kernel needs at least 3 blades");
  const auto verts = polygon_vertices(radius, blades);
  Kernel k = detail::make_grid(Family::kPolygonal, radius);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const Point2 p(dx, dy);
      if (!point_in_polygon(p, verts)) continue;
      k.at(dx, dy) = std::max(0.0, radial_weight(p.norm(), radius));
    }
  }
  detail::normalize(k);
  return k;
}

/// Builds the kernel of `spec.family` at `radius`; `sigma` is only read by
/// the gaussian family.
inline Kernel make_kernel(const KernelSpec& spec, int radius, double sigma) {
  switch (spec.family) {
    case Family::kGaussian: return gaussian_kernel(sigma, radius);
    case Family::kSmoothStep: return smoothstep_kernel(radius);
    case Family::kPolygonal: return polygonal_kernel(radius, spec.blades);
  }
  fail(ErrorKind::kInvalidArgument, "unknown kernel family");
}

/// Thread-safe memo of constructed kernels keyed by (family, radius, sigma
/// bits, blades). Entries for a key are value-identical, so a racing insert
/// simply overwrites with the same kernel. Beyond `capacity` entries new
/// kernels are built but not stored.
class KernelCache {
 public:
  explicit KernelCache(std::size_t capacity = 4096) : capacity_(capacity) {}

  std::shared_ptr<const Kernel> get(const KernelSpec& spec, int radius, double sigma) {
    const Key key{static_cast<int>(spec.family), radius,
                  spec.family == Family::kGaussian ? std::bit_cast<std::uint64_t>(sigma) : 0,
                  spec.family == Family::kPolygonal ? spec.blades : 0};
    {
      std::shared_lock lock(mutex_);
      const auto it = entries_.find(key);
      if (it != entries_.end()) return it->second;
    }
    auto kernel = std::make_shared<const Kernel>(make_kernel(spec, radius, sigma));
    std::unique_lock lock(mutex_);
    if (entries_.size() < capacity_ || entries_.count(key)) entries_[key] = kernel;
    return kernel;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

 private:
  using Key = std::tuple<int, int, std::uint64_t, int>;
  std::size_t capacity_;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const Kernel>> entries_;
};

}  // namespace dofsplat::kernels
