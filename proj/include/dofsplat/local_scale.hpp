// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "dofsplat/error.hpp"
#include "dofsplat/image.hpp"
#include "dofsplat/parallel.hpp"

namespace dofsplat::local_scale {

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct CellRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
};

struct GridSpec {
  int image_width = 0;
  int image_height = 0;
  int rows = 0;
  int cols = 0;
  int target = 0;
  std::vector<int> row_edges;  // rows + 1 entries
  std::vector<int> col_edges;  // cols + 1 entries

  int cell_count() const { return rows * cols; }
  CellRect cell(int row, int col) const {
    return {col_edges[col], row_edges[row], col_edges[col + 1], row_edges[row + 1]};
  }
  int row_of(int y) const {
    return static_cast<int>(std::upper_bound(row_edges.begin(), row_edges.end(), y) - row_edges.begin()) - 1;
  }
  int col_of(int x) const {
    return static_cast<int>(std::upper_bound(col_edges.begin(), col_edges.end(), x) - col_edges.begin()) - 1;
  }
};

namespace detail {

/// Tiles [0, extent) with cells of side `target`. A remainder of at least
/// g_min pixels becomes its own (smaller) cell; a shorter one is absorbed by
/// the last cell.
inline std::vector<int> tile_axis(int extent, int target, int g_min) {
  std::vector<int> edges{0};
  if (extent <= target) {
    edges.push_back(extent);
    return edges;
  }
  const int full = extent / target;
  const int rem = extent - full * target;
  for (int k = 1; k <= full; ++k) edges.push_back(k * target);
  if (rem >= g_min) {
    edges.push_back(extent);
  } else {
    edges.back() = extent;
  }
  return edges;
}

}  // namespace detail

/// Adaptive grid: target side round(sqrt(H*W) / 16) clamped to
/// [g_min, g_max]; an image shorter than g_min on either side is one cell.
inline GridSpec build_grid(int height, int width, int g_min = 15, int g_max = 60) {
  require(height > 0 && width > 0, ErrorKind::kInvalidArgument, "grid needs a non-empty image");
  require(g_min >= 1 && g_max >= g_min, ErrorKind::kInvalidArgument, "grid bounds need 1 <= g_min <= g_max");
  GridSpec g;
  g.image_width = width;
  g.image_height = height;
  const double geo = std::sqrt(static_cast<double>(height) * static_cast<double>(width)) / 16.0;
  g.target = std::clamp(static_cast<int>(std::lround(geo)), g_min, g_max);
  if (height < g_min || width < g_min) {
    g.row_edges = {0, height};
    g.col_edges = {0, width};
  } else {
    g.row_edges = detail::tile_axis(height, g.target, g_min);
    g.col_edges = detail::tile_axis(width, g.target, g_min);
  }
  g.rows = static_cast<int>(g.row_edges.size()) - 1;
  g.cols = static_cast<int>(g.col_edges.size()) - 1;
  return g;
}

inline constexpr std::size_t kMinCellPoints = 5;

struct CellFit {
  double s = 0.0;
  double t = 0.0;
  double E = 0.0;  // mean absolute residual
  std::size_t n = 0;
  bool usable = false;
};

/// Ridge solution of D_r ~ s * D_m + t: (X^T X + lambda I)^{-1} X^T y with
/// X = [D_m, 1]. `pairs` holds (D_m, D_r).
inline CellFit fit_cell(const std::vector<std::pair<double, double>>& pairs, double lambda = 1e-6) {
  require(lambda > 0.0, ErrorKind::kInvalidArgument, "Tikhonov lambda must be positive");
  CellFit fit;
  fit.n = pairs.size();
  fit.usable = fit.n >= kMinCellPoints;
  if (pairs.empty()) return fit;
  double sxx = 0.0, sx = 0.0, sxy = 0.0, sy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxx += x * x;
    sx += x;
    sxy += x * y;
    sy += y;
  }
  const double a = sxx + lambda, b = sx, d = static_cast<double>(fit.n) + lambda;
  const double det = a * d - b * b;
  fit.s = (d * sxy - b * sy) / det;
  fit.t = (a * sy - b * sxy) / det;
  double err = 0.0;
  for (const auto& [x, y] : pairs) err += std::abs(y - (fit.s * x + fit.t));
  fit.E = err / static_cast<double>(fit.n);
  return fit;
}

/// Collects pixels where both depths are valid, per cell, and fits each.
/// Result is row-major over the grid.
inline std::vector<CellFit> fit_grid(const DepthMap& depth_r, const DepthMap& depth_m, const GridSpec& grid,
                                     double lambda = 1e-6, int threads = 1) {
  require(depth_r.same_shape(depth_m), ErrorKind::kDimensionMismatch, "rendered and monocular depth sizes differ");
  require(depth_r.width == grid.image_width && depth_r.height == grid.image_height,
          ErrorKind::kDimensionMismatch, "grid does not match depth size");
  std::vector<CellFit> fits(static_cast<std::size_t>(grid.cell_count()));
  parallel_for(fits.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t c = begin; c < end; ++c) {
      const CellRect rect = grid.cell(static_cast<int>(c) / grid.cols, static_cast<int>(c) % grid.cols);
      pairs.clear();
      for (int y = rect.y0; y < rect.y1; ++y) {
        for (int x = rect.x0; x < rect.x1; ++x) {
          if (depth_r.valid(x, y) && depth_m.valid(x, y)) pairs.emplace_back(depth_m.at(x, y), depth_r.at(x, y));
        }
      }
      fits[c] = fit_cell(pairs, lambda);
    }
  });
  return fits;
}

enum class ErrorUpsampling { kBroadcast, kBilinear };

/// Error spreads at or below this many meters count as a single level, so
/// every computed pixel maps to 0.
inline constexpr double kMinErrorRange = 1e-6;

/// Normalized per-pixel fit error in [0,1]. `computed` marks pixels whose
/// value came from a usable cell with both depths valid; everything else
/// holds the default 1.
struct ErrorMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;
  std::vector<std::uint8_t> computed;
  double e_min = 0.0;
  double e_max = 0.0;
};

inline ErrorMap error_map(const DepthMap& depth_r, const DepthMap& depth_m, const GridSpec& grid,
                          const std::vector<CellFit>& fits,
                          ErrorUpsampling upsampling = ErrorUpsampling::kBroadcast,
                          double min_range = kMinErrorRange) {
  require(depth_r.same_shape(depth_m), ErrorKind::kDimensionMismatch, "rendered and monocular depth sizes differ");
  require(depth_r.width == grid.image_width && depth_r.height == grid.image_height,
          ErrorKind::kDimensionMismatch, "grid does not match depth size");
  require(fits.size() == static_cast<std::size_t>(grid.cell_count()), ErrorKind::kInvalidArgument,
          "one fit per grid cell required");
  const int W = depth_r.width, H = depth_r.height;
  ErrorMap m;
  m.width = W;
  m.height = H;
  m.values.assign(static_cast<std::size_t>(W) * H, 1.0f);
  m.computed.assign(m.values.size(), 0);
  std::vector<double> raw(m.values.size(), 1.0);

  auto cell_center = [&](int row, int col) {
    const CellRect r = grid.cell(row, col);
    return std::pair<double, double>{0.5 * (r.x0 + r.x1 - 1), 0.5 * (r.y0 + r.y1 - 1)};
  };
  // Bilinear blend of usable cell errors between neighbouring cell centers.
  auto interpolated = [&](int x, int y, int row, int col) {
    const auto [cx, cy] = cell_center(row, col);
    const int c1 = std::clamp(x >= cx ? col + 1 : col - 1, 0, grid.cols - 1);
    const int r1 = std::clamp(y >= cy ? row + 1 : row - 1, 0, grid.rows - 1);
    const double ox = c1 == col ? cx : cell_center(row, c1).first;
    const double oy = r1 == row ? cy : cell_center(r1, col).second;
    const double ax = ox == cx ? 0.0 : std::clamp((x - cx) / (ox - cx), 0.0, 1.0);
    const double ay = oy == cy ? 0.0 : std::clamp((y - cy) / (oy - cy), 0.0, 1.0);
    double acc = 0.0, wsum = 0.0;
    const int rs[2] = {row, r1}, cs[2] = {col, c1};
    const double wy[2] = {1.0 - ay, ay}, wx[2] = {1.0 - ax, ax};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const CellFit& f = fits[static_cast<std::size_t>(rs[a]) * grid.cols + cs[b]];
        const double w = wy[a] * wx[b];
        if (!f.usable || w == 0.0) continue;
        acc += w * f.E;
        wsum += w;
      }
    }
    return wsum > 0.0 ? acc / wsum : fits[static_cast<std::size_t>(row) * grid.cols + col].E;
  };

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int y = 0; y < H; ++y) {
    const int row = grid.row_of(y);
    for (int x = 0; x < W; ++x) {
      const int col = grid.col_of(x);
      const CellFit& f = fits[static_cast<std::size_t>(row) * grid.cols + col];
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      if (!f.usable || !depth_r.valid(x, y) || !depth_m.valid(x, y) || !std::isfinite(f.E)) continue;
      raw[i] = upsampling == ErrorUpsampling::kBroadcast ? f.E : interpolated(x, y, row, col);
      m.computed[i] = 1;
      lo = std::min(lo, raw[i]);
      hi = std::max(hi, raw[i]);
    }
  }
  if (hi >= lo) {
    m.e_min = lo;
    m.e_max = hi;
  }
  const double range = hi - lo;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!m.computed[i]) continue;
    const double v = range > min_range ? (raw[i] - lo) / range : 0.0;
    m.values[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return m;
}

struct DepthConsistency {
  double abs_term = 0.0;
  double corr_term = 0.0;
  double loss = 0.0;
  std::size_t valid_pixels = 0;
  std::size_t invalid_pixels = 0;
};

/// L_abs + alpha * L_corr. L_abs averages the normalized error over the
/// computed region; L_corr = |1 - mean(D^_r * D^_m)| over the rest, with
/// D^ = (D - min) / (max - min + eps) per map over its valid pixels (invalid
/// depths contribute 0).
inline DepthConsistency depth_consistency_loss(const DepthMap& depth_r, const DepthMap& depth_m,
                                               const ErrorMap& emap, double alpha, double eps = 1e-8) {
  require(depth_r.same_shape(depth_m) && emap.width == depth_r.width && emap.height == depth_r.height,
          ErrorKind::kDimensionMismatch, "depth maps and error map sizes differ");
  require(alpha >= 0.0, ErrorKind::kInvalidArgument, "alpha must be non-negative");
  auto range_of = [](const DepthMap& d) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (float v : d.data) {
      if (!DepthMap::is_valid_value(v)) continue;
      lo = std::min<double>(lo, v);
      hi = std::max<double>(hi, v);
    }
    return std::pair<double, double>{lo, hi};
  };
  const auto [r_lo, r_hi] = range_of(depth_r);
  const auto [m_lo, m_hi] = range_of(depth_m);
  auto normalized = [&](const DepthMap& d, std::size_t i, double lo, double hi) {
    if (!d.valid_index(i)) return 0.0;
    return (static_cast<double>(d.data[i]) - lo) / (hi - lo + eps);
  };

  DepthConsistency out;
  double abs_sum = 0.0, corr_sum = 0.0;
  for (std::size_t i = 0; i < emap.values.size(); ++i) {
    if (emap.computed[i]) {
      abs_sum += emap.values[i];
      ++out.valid_pixels;
    } else {
      corr_sum += normalized(depth_r, i, r_lo, r_hi) * normalized(depth_m, i, m_lo, m_hi);
      ++out.invalid_pixels;
    }
  }
  out.abs_term = out.valid_pixels ? abs_sum / static_cast<double>(out.valid_pixels) : 0.0;
  out.corr_term = out.invalid_pixels ? std::abs(1.0 - corr_sum / static_cast<double>(out.invalid_pixels)) : 0.0;
  out.loss = out.abs_term + alpha * out.corr_term;
  return out;
}

}  // namespace dofsplat::local_scale
