// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dofsplat/error.hpp"
#include "dofsplat/io/binary.hpp"
#include "dofsplat/quantile.hpp"

namespace dofsplat::density {

/// Per-Gaussian statistics, structure-of-arrays.
struct GaussianStats {
  std::vector<double> opacity;
  std::vector<double> pos_grad;
  std::vector<double> dof_grad;
  std::vector<double> accum;

  std::size_t size() const { return opacity.size(); }

  void validate() const {
    const std::size_t n = opacity.size();
    require(pos_grad.size() == n && dof_grad.size() == n && accum.size() == n,
            ErrorKind::kDimensionMismatch, "GaussianStats arrays differ in length");
    for (std::size_t i = 0; i < n; ++i) {
      require(std::isfinite(opacity[i]) && opacity[i] >= 0.0 && opacity[i] <= 1.0,
              ErrorKind::kInvalidArgument, "opacity outside [0,1] at index " + std::to_string(i));
      require(std::isfinite(pos_grad[i]) && pos_grad[i] >= 0.0 && std::isfinite(dof_grad[i]) &&
                  dof_grad[i] >= 0.0 && std::isfinite(accum[i]) && accum[i] >= 0.0,
              ErrorKind::kInvalidArgument, "negative or non-finite statistic at index " + std::to_string(i));
    }
  }
};

enum class KeepRule {
  /// Keep the ceil(tau * N) largest gradient norms.
  kTopFraction,
  /// Keep norms >= the tau-quantile of all norms.
  kQuantileThreshold,
};

using Mask = std::vector<bool>;

inline std::size_t keep_count(double tau, std::size_t n) {
  // Guard against tau * n landing a few ulps above an integer.
  return std::min(n, static_cast<std::size_t>(std::ceil(tau * static_cast<double>(n) - 1e-9)));
}

/// Preservation mask over DoF gradient norms. Under kTopFraction, ties are
/// resolved in favour of the lower index.
inline Mask keep_mask(std::span<const double> norms, double tau = 0.2, KeepRule rule = KeepRule::kTopFraction) {
  require(tau > 0.0 && tau <= 1.0, ErrorKind::kInvalidArgument, "tau_keep must lie in (0,1]");
  Mask keep(norms.size(), false);
  if (norms.empty()) return keep;
  if (rule == KeepRule::kQuantileThreshold) {
    const double q = quantile(norms, tau);
    for (std::size_t i = 0; i < norms.size(); ++i) keep[i] = norms[i] >= q;
    return keep;
  }
  std::vector<std::size_t> order(norms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });
  const std::size_t k = keep_count(tau, norms.size());
  for (std::size_t r = 0; r < k; ++r) keep[order[r]] = true;
  return keep;
}

struct PruneThresholds {
  double alpha_min = 0.005;
  double grad_min = 0.0002;
};

/// (alpha < alpha_min) OR ((|grad x| < g_min) AND NOT keep).
inline Mask prune_mask(const GaussianStats& stats, const Mask& keep, const PruneThresholds& th = {}) {
  require(keep.size() == stats.size() && stats.pos_grad.size() == stats.size(), ErrorKind::kDimensionMismatch,
          "prune inputs differ in length");
  Mask prune(stats.size(), false);
  for (std::size_t i = 0; i < stats.size(); ++i) {
    prune[i] = (stats.opacity[i] < th.alpha_min) || ((stats.pos_grad[i] < th.grad_min) && !keep[i]);
  }
  return prune;
}

/// w_i = exp(-(g_i - Q25) / (Q75 - Q25 + eps)).
inline std::vector<double> iqr_weights(std::span<const double> norms, double eps = 1e-8) {
  require(!norms.empty(), ErrorKind::kDegenerate, "IQR weights of an empty array");
  std::vector<double> sorted(norms.begin(), norms.end());
  std::sort(sorted.begin(), sorted.end());
  const double q25 = quantile_sorted(sorted, 0.25);
  const double q75 = quantile_sorted(sorted, 0.75);
  const double denom = q75 - q25 + eps;
  std::vector<double> w(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) w[i] = std::exp(-(norms[i] - q25) / denom);
  return w;
}

/// accum_i += w_i * |g_i| with weights from this batch.
inline void accumulate(GaussianStats& stats, std::span<const double> new_grads, double eps = 1e-8) {
  require(new_grads.size() == stats.size() && stats.accum.size() == stats.size(), ErrorKind::kDimensionMismatch,
          "gradient batch length differs from the statistics");
  if (new_grads.empty()) return;
  const auto w = iqr_weights(new_grads, eps);
  for (std::size_t i = 0; i < stats.size(); ++i) stats.accum[i] += w[i] * std::abs(new_grads[i]);
}

// GSTA1 file: magic, u32 count, count x (f32 opacity, f32 pos_grad, f32 dof_grad, f32 accum).
inline constexpr const char* kStatsMagic = "GSTA1";

inline GaussianStats load_stats(const std::string& path) {
  io::ByteReader rd = io::ByteReader::from_file(path, "GSTA1 stats");
  rd.expect_magic(kStatsMagic);
  const std::uint32_t n = rd.u32();
  require(static_cast<std::uint64_t>(n) * 16 == rd.remaining(), ErrorKind::kFormat,
          rd.what() + ": payload size does not match count");
  GaussianStats s;
  s.opacity.resize(n);
  s.pos_grad.resize(n);
  s.dof_grad.resize(n);
  s.accum.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    s.opacity[i] = rd.f32();
    s.pos_grad[i] = rd.f32();
    s.dof_grad[i] = rd.f32();
    s.accum[i] = rd.f32();
  }
  try {
    s.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kFormat, rd.what() + ": " + e.what());
  }
  return s;
}

inline void save_stats(const std::string& path, const GaussianStats& s) {
  s.validate();
  io::ByteWriter wr;
  wr.bytes(kStatsMagic);
  wr.u32(static_cast<std::uint32_t>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    wr.f32(static_cast<float>(s.opacity[i]));
    wr.f32(static_cast<float>(s.pos_grad[i]));
    wr.f32(static_cast<float>(s.dof_grad[i]));
    wr.f32(static_cast<float>(s.accum[i]));
  }
  wr.save(path);
}

// Mask file: magic GMSK1, u32 count, keep bits then prune bits, each packed
// LSB-first and padded to a whole byte.
inline constexpr const char* kMaskMagic = "GMSK1";

inline void save_masks(const std::string& path, const Mask& keep, const Mask& prune) {
  require(keep.size() == prune.size(), ErrorKind::kDimensionMismatch, "mask lengths differ");
  io::ByteWriter wr;
  wr.bytes(kMaskMagic);
  wr.u32(static_cast<std::uint32_t>(keep.size()));
  for (const Mask* m : {&keep, &prune}) {
    std::string packed((m->size() + 7) / 8, '\0');
    for (std::size_t i = 0; i < m->size(); ++i) {
      if ((*m)[i]) packed[i / 8] = static_cast<char>(packed[i / 8] | (1 << (i % 8)));
    }
    wr.bytes(packed);
  }
  wr.save(path);
}

inline std::pair<Mask, Mask> load_masks(const std::string& path) {
  io::ByteReader rd = io::ByteReader::from_file(path, "GMSK1 masks");
  rd.expect_magic(kMaskMagic);
  const std::uint32_t n = rd.u32();
  const std::size_t bytes = (static_cast<std::size_t>(n) + 7) / 8;
  require(rd.remaining() == 2 * bytes, ErrorKind::kFormat, rd.what() + ": payload size does not match count");
  std::pair<Mask, Mask> out{Mask(n), Mask(n)};
  for (Mask* m : {&out.first, &out.second}) {
    std::size_t i = 0;
    for (std::size_t b = 0; b < bytes; ++b) {
      const std::uint8_t byte = rd.u8();
      for (int bit = 0; bit < 8 && i < n; ++bit, ++i) (*m)[i] = (byte >> bit) & 1;
    }
  }
  return out;
}

}  // namespace dofsplat::density
