// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include <Eigen/Core>

namespace dofsplat {

struct Match {
  Eigen::Vector2d p_i;
  Eigen::Vector2d p_j;
  double confidence = 1.0;
};

/// Correspondences between views `view_i` and `view_j`. Coordinates are
/// sub-pixel and kept as given.
struct MatchSet {
  int view_i = 0;
  int view_j = 0;
  std::vector<Match> matches;

  std::size_t size() const { return matches.size(); }
  bool empty() const { return matches.empty(); }

  /// Same correspondences with the roles of the two views exchanged.
  MatchSet transposed() const {
    MatchSet out{view_j, view_i, {}};
    out.matches.reserve(matches.size());
    for (const auto& m : matches) out.matches.push_back({m.p_j, m.p_i, m.confidence});
    return out;
  }
};

}  // namespace dofsplat
