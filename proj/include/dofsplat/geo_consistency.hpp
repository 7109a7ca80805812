// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <map>
#include <vector>

#include <Eigen/Core>

#include "dofsplat/camera.hpp"
#include "dofsplat/error.hpp"
#include "dofsplat/image.hpp"
#include "dofsplat/matches.hpp"
#include "dofsplat/parallel.hpp"
#include "dofsplat/splat_samples.hpp"

namespace dofsplat::geo {

using WorldPoint = Eigen::Vector3d;

inline constexpr double kMinAccumulatedAlpha = 1e-4;

/// Front-to-back alpha compositing of sample depths,
///   D(x) = sum_k alpha_k T_k d_k,  T_k = prod_{l<k} (1 - alpha_l).
/// The sum is not renormalized by the accumulated alpha; pixels whose
/// accumulated alpha stays below 1e-4 are marked invalid.
inline DepthMap render_depth(const SplatSampleBuffer& samples, int threads = 1) {
  DepthMap out(samples.width(), samples.height());
  parallel_for(samples.pixel_count(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double transmittance = 1.0;
      double accumulated = 0.0;
      double depth = 0.0;
      for (const SplatSample& s : samples.pixel(i)) {
        const double w = static_cast<double>(s.alpha) * transmittance;
        depth += w * s.depth;
        accumulated += w;
        transmittance *= 1.0 - static_cast<double>(s.alpha);
      }
      out.data[i] = accumulated < kMinAccumulatedAlpha ? DepthMap::kInvalidDepth
                                                       : static_cast<float>(depth);
    }
  });
  return out;
}

/// Keeps correspondences with confidence >= threshold.
inline MatchSet filter_matches(const MatchSet& matches, double threshold = 0.5) {
  MatchSet out{matches.view_i, matches.view_j, {}};
  for (const auto& m : matches.matches) {
    if (m.confidence >= threshold) out.matches.push_back(m);
  }
  return out;
}

/// Lifts pixel p at camera-frame depth `depth` into world coordinates.
inline WorldPoint unproject(const Eigen::Vector2d& p, double depth, const CameraView& cam) {
  require(depth > 0.0 && std::isfinite(depth), ErrorKind::kInvalidArgument,
          "unprojection depth must be positive");
  return cam.camera_to_world(depth * cam.ray(p.x(), p.y()));
}

struct GeometricLoss {
  double value = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
  /// Set when no match had valid depth on both sides.
  bool no_usable_matches = true;
};

/// Mean L1 distance between the world points that the two views' depths
/// assign to each correspondence. Matches whose sampled depth is invalid on
/// either side are skipped.
inline GeometricLoss geometric_loss(const MatchSet& matches, const DepthMap& depth_i,
                                    const DepthMap& depth_j, const CameraView& cam_i,
                                    const CameraView& cam_j) {
  GeometricLoss out;
  double sum = 0.0;
  for (const auto& m : matches.matches) {
    const auto zi = sample_bilinear(depth_i, m.p_i.x(), m.p_i.y());
    const auto zj = sample_bilinear(depth_j, m.p_j.x(), m.p_j.y());
    if (!zi || !zj || !(*zi > 0.0) || !(*zj > 0.0)) {
      ++out.skipped;
      continue;
    }
    const WorldPoint Pi = unproject(m.p_i, *zi, cam_i);
    const WorldPoint Pj = unproject(m.p_j, *zj, cam_j);
    sum += (Pi - Pj).cwiseAbs().sum();
    ++out.used;
  }
  out.no_usable_matches = out.used == 0;
  out.value = out.used ? sum / static_cast<double>(out.used) : 0.0;
  return out;
}

/// Pools several view pairs: the mean is taken over all usable matches.
inline GeometricLoss geometric_loss(const std::vector<MatchSet>& sets,
                                    const std::map<int, const DepthMap*>& depth_by_view,
                                    const std::map<int, const CameraView*>& cam_by_view) {
  GeometricLoss out;
  double sum = 0.0;
  for (const auto& set : sets) {
    const auto check = [&](int v) {
      require(depth_by_view.count(v) && cam_by_view.count(v), ErrorKind::kInvalidArgument,
              "match set references unknown view " + std::to_string(v));
    };
    check(set.view_i);
    check(set.view_j);
    const GeometricLoss part =
        geometric_loss(set, *depth_by_view.at(set.view_i), *depth_by_view.at(set.view_j),
                       *cam_by_view.at(set.view_i), *cam_by_view.at(set.view_j));
    sum += part.value * static_cast<double>(part.used);
    out.used += part.used;
    out.skipped += part.skipped;
  }
  out.no_usable_matches = out.used == 0;
  out.value = out.used ? sum / static_cast<double>(out.used) : 0.0;
  return out;
}

}  // namespace dofsplat::geo
