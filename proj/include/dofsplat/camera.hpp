// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/LU>

#include "dofsplat/error.hpp"

namespace dofsplat {

/// Pinhole camera with world-to-camera extrinsics: X_cam = R * X_world + t.
struct CameraView {
  int view_id = 0;
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  int width = 0;
  int height = 0;

  void validate() const {
    const std::string who = "camera " + std::to_string(view_id) + ": ";
    require(width > 0 && height > 0, ErrorKind::kInvalidArgument, who + "image size must be positive");
    require(K.allFinite() && R.allFinite() && t.allFinite(), ErrorKind::kInvalidArgument,
            who + "non-finite parameters");
    require(K(1, 0) == 0.0 && K(2, 0) == 0.0 && K(2, 1) == 0.0, ErrorKind::kInvalidArgument,
            who + "K must be upper-triangular");
    require(K(0, 0) > 0.0 && K(1, 1) > 0.0, ErrorKind::kInvalidArgument,
            who + "K focal entries must be positive");
    require(K(2, 2) == 1.0, ErrorKind::kInvalidArgument, who + "K(2,2) must be 1");
    const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    require(ortho <= 1e-9, ErrorKind::kInvalidArgument, who + "R is not orthonormal");
    require(std::abs(R.determinant() - 1.0) <= 1e-9, ErrorKind::kInvalidArgument,
            who + "det(R) != +1");
  }

  /// Pixel centers sit at integer coordinates, so the image covers
  /// [-0.5, width - 0.5] x [-0.5, height - 0.5].
  bool contains(double x, double y) const {
    return x >= -0.5 && y >= -0.5 && x <= width - 0.5 && y <= height - 0.5;
  }

  /// K^{-1} [x, y, 1]^T: camera-frame ray with unit z.
  Eigen::Vector3d ray(double x, double y) const {
    const double fx = K(0, 0), s = K(0, 1), cx = K(0, 2), fy = K(1, 1), cy = K(1, 2);
    const double yn = (y - cy) / fy;
    const double xn = (x - cx - s * yn) / fx;
    return {xn, yn, 1.0};
  }

  Eigen::Vector3d camera_to_world(const Eigen::Vector3d& x_cam) const {
    return R.transpose() * (x_cam - t);
  }

  Eigen::Vector3d world_to_camera(const Eigen::Vector3d& x_world) const {
    return R * x_world + t;
  }

  /// dehomogenize(K * X_cam). Returns nullopt for points at or behind the
  /// camera plane.
  std::optional<Eigen::Vector2d> project_camera(const Eigen::Vector3d& x_cam) const {
    if (!(x_cam.z() > 0.0)) return std::nullopt;
    const Eigen::Vector3d h = K * x_cam;
    return Eigen::Vector2d(h.x() / h.z(), h.y() / h.z());
  }

  std::optional<Eigen::Vector2d> project_world(const Eigen::Vector3d& x_world) const {
    return project_camera(world_to_camera(x_world));
  }
};

/// Relative pose mapping camera-i coordinates into camera j:
/// X_j = R_ji X_i + t_ji.
struct RelativePose {
  Eigen::Matrix3d R_ji;
  Eigen::Vector3d t_ji;
};

inline RelativePose relative_pose(const CameraView& cam_i, const CameraView& cam_j) {
  RelativePose rel;
  rel.R_ji = cam_j.R * cam_i.R.transpose();
  rel.t_ji = cam_j.t - rel.R_ji * cam_i.t;
  return rel;
}

}  // namespace dofsplat
