// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "dofsplat/camera.hpp"
#include "dofsplat/error.hpp"
#include "dofsplat/image.hpp"
#include "dofsplat/matches.hpp"
#include "dofsplat/parallel.hpp"

namespace dofsplat::global_scale {

/// Affine depth correction s * D + b, s > 0.
struct ScaleShift {
  double s = 1.0;
  double b = 0.0;
};

struct ScaleView {
  CameraView camera;
  DepthMap raw;
};

/// Which depths form the observed ratio in the ratio-consistency term.
/// kScaled compares s_j D_j + b_j against s_i D_i + b_i, which vanishes at
/// the true parameters; kRaw uses the uncorrected monocular depths.
enum class RatioDepth { kScaled, kRaw };

struct RecoveryProblem {
  std::vector<ScaleView> views;
  std::vector<MatchSet> matches;
  double lambda_ratio = 0.5;
  RatioDepth ratio_depth = RatioDepth::kScaled;

  int index_of(int view_id) const {
    for (std::size_t k = 0; k < views.size(); ++k) {
      if (views[k].camera.view_id == view_id) return static_cast<int>(k);
    }
    return -1;
  }

  void validate() const {
    require(lambda_ratio >= 0.0 && std::isfinite(lambda_ratio), ErrorKind::kInvalidArgument,
            "lambda_ratio must be non-negative");
    for (const auto& v : views) {
      v.camera.validate();
      require(v.raw.width == v.camera.width && v.raw.height == v.camera.height,
              ErrorKind::kDimensionMismatch,
              "depth of view " + std::to_string(v.camera.view_id) + " does not match its camera size");
    }
    for (const auto& set : matches) {
      require(index_of(set.view_i) >= 0 && index_of(set.view_j) >= 0, ErrorKind::kInvalidArgument,
              "matches reference unknown view pair (" + std::to_string(set.view_i) + ", " +
                  std::to_string(set.view_j) + ")");
    }
  }
};

/// gamma = e_z^T (R_ji x_i + t_ji / Z_i), x_i = K_i^{-1} [p_i; 1]: the depth
/// ratio Z_j / Z_i predicted by the relative pose.
inline double theoretical_ratio(const CameraView& cam_i, const CameraView& cam_j,
                                const Eigen::Vector2d& p_i, double Z_i) {
  require(Z_i > 0.0 && std::isfinite(Z_i), ErrorKind::kInvalidArgument, "Z_i must be positive");
  const RelativePose rel = relative_pose(cam_i, cam_j);
  const Eigen::Vector3d x_i = cam_i.ray(p_i.x(), p_i.y());
  return (rel.R_ji * x_i + rel.t_ji / Z_i).z();
}

inline DepthMap align_depth(const DepthMap& raw, const ScaleShift& params) {
  DepthMap out = raw;
  for (float& v : out.data) {
    if (!DepthMap::is_valid_value(v)) {
      v = DepthMap::kInvalidDepth;
      continue;
    }
    const double a = params.s * v + params.b;
    v = a > 0.0 ? static_cast<float>(a) : DepthMap::kInvalidDepth;
  }
  out.canonicalize();
  return out;
}

namespace detail {

/// One directed correspondence: a point of view `src` seen at `p_dst` in
/// view `dst`, with raw depths sampled on both sides.
struct Observation {
  int src = 0;
  int dst = 0;
  Eigen::Vector3d ray_src;
  Eigen::Vector2d p_dst;
  double raw_src = 0.0;
  double raw_dst = 0.0;
  Eigen::Matrix3d R_rel;
  Eigen::Vector3d t_rel;
};

/// Each match contributes in both directions so every view's parameters enter
/// a reprojection term.
inline std::vector<Observation> build_observations(const RecoveryProblem& problem, std::size_t* skipped) {
  std::vector<Observation> obs;
  std::size_t skip = 0;
  for (const auto& set : problem.matches) {
    const int a = problem.index_of(set.view_i);
    const int b = problem.index_of(set.view_j);
    const ScaleView& va = problem.views[a];
    const ScaleView& vb = problem.views[b];
    const RelativePose ab = relative_pose(va.camera, vb.camera);
    const RelativePose ba = relative_pose(vb.camera, va.camera);
    for (const auto& m : set.matches) {
      const auto da = sample_bilinear(va.raw, m.p_i.x(), m.p_i.y());
      const auto db = sample_bilinear(vb.raw, m.p_j.x(), m.p_j.y());
      if (!da || !db) {
        ++skip;
        continue;
      }
      obs.push_back({a, b, va.camera.ray(m.p_i.x(), m.p_i.y()), m.p_j, *da, *db, ab.R_ji, ab.t_ji});
      obs.push_back({b, a, vb.camera.ray(m.p_j.x(), m.p_j.y()), m.p_i, *db, *da, ba.R_ji, ba.t_ji});
    }
  }
  if (skipped) *skipped = skip;
  return obs;
}

/// Three residuals per observation: reprojection (u, v) in pixels and the
/// ratio mismatch scaled by sqrt(lambda). Non-finite when the lifted point
/// lands behind the target camera or the scaled depth is not positive.
inline void residuals(const RecoveryProblem& problem, const std::vector<Observation>& obs,
                      const std::vector<ScaleShift>& params, Eigen::VectorXd& r, int threads) {
  r.resize(static_cast<Eigen::Index>(obs.size() * 3));
  const double w = std::sqrt(problem.lambda_ratio);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  parallel_for(obs.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const Observation& o = obs[k];
      const auto& cam_dst = problem.views[o.dst].camera;
      const double z_src = params[o.src].s * o.raw_src + params[o.src].b;
      const auto idx = static_cast<Eigen::Index>(3 * k);
      if (!(z_src > 0.0)) {
        r.segment<3>(idx).setConstant(nan);
        continue;
      }
      // R_j (R_i^T (Z x - t_i)) + t_j == R_ji (Z x) + t_ji
      const Eigen::Vector3d X_dst = o.R_rel * (z_src * o.ray_src) + o.t_rel;
      const auto uv = cam_dst.project_camera(X_dst);
      if (!uv) {
        r.segment<3>(idx).setConstant(nan);
        continue;
      }
      r[idx] = uv->x() - o.p_dst.x();
      r[idx + 1] = uv->y() - o.p_dst.y();
      const double gamma = (o.R_rel * o.ray_src + o.t_rel / z_src).z();
      double observed;
      if (problem.ratio_depth == RatioDepth::kRaw) {
        observed = o.raw_dst / o.raw_src;
      } else {
        observed = (params[o.dst].s * o.raw_dst + params[o.dst].b) / z_src;
      }
      r[idx + 2] = w * (observed - gamma);
    }
  });
}

inline double sum_squares(const Eigen::VectorXd& r) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) s += r[i] * r[i];
  return s;
}

}  // namespace detail

/// Reprojection plus lambda-weighted ratio consistency, summed over both
/// directions of every usable match.
inline double recovery_objective(const std::vector<ScaleShift>& params, const RecoveryProblem& problem,
                                 int threads = 1) {
  problem.validate();
  require(params.size() == problem.views.size(), ErrorKind::kInvalidArgument,
          "need one ScaleShift per view");
  const auto obs = detail::build_observations(problem, nullptr);
  require(!obs.empty(), ErrorKind::kDegenerate, "every match touches invalid depth; no signal");
  Eigen::VectorXd r;
  detail::residuals(problem, obs, params, r, threads);
  return detail::sum_squares(r);
}

struct OptimizerOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-9;
  double initial_damping = 1e-3;
  double jacobian_step = 1e-6;
  /// Relative eigenvalue floor of J^T J below which the problem is treated
  /// as having a free global gauge.
  double rank_tolerance = 1e-10;
  int threads = 1;
};

struct RecoveryResult {
  std::vector<ScaleShift> params;
  double objective = 0.0;
  /// Objective after initialization and after every accepted step.
  std::vector<double> trace;
  int iterations = 0;
  /// True when view 0 was pinned to s = 1, b = 0 to remove a gauge freedom.
  bool anchored = false;
  std::size_t observations = 0;
  std::size_t skipped_matches = 0;
  std::string stop_reason;
};

namespace detail {

struct Solve {
  std::vector<ScaleShift> params;
  double objective;
  std::vector<double> trace;
  int iterations;
  std::string stop_reason;
  Eigen::MatrixXd normal;  // J^T J at the returned point
};

inline Solve levenberg_marquardt(const RecoveryProblem& problem, const std::vector<Observation>& obs,
                                 std::vector<ScaleShift> start, bool anchor_first,
                                 const OptimizerOptions& opt) {
  const int nviews = static_cast<int>(problem.views.size());
  const int first = anchor_first ? 1 : 0;
  const int nparam = 2 * (nviews - first);
  if (anchor_first) start[0] = ScaleShift{};

  auto unpack = [&](const Eigen::VectorXd& theta) {
    std::vector<ScaleShift> p = start;
    for (int v = first; v < nviews; ++v) {
      const int k = 2 * (v - first);
      p[v] = {std::exp(theta[k]), theta[k + 1]};
    }
    return p;
  };
  Eigen::VectorXd theta(nparam);
  for (int v = first; v < nviews; ++v) {
    const int k = 2 * (v - first);
    require(start[v].s > 0.0, ErrorKind::kInvalidArgument, "initial scale must be positive");
    theta[k] = std::log(start[v].s);
    theta[k + 1] = start[v].b;
  }

  Eigen::VectorXd r, r_plus, r_minus;
  auto eval = [&](const Eigen::VectorXd& th, Eigen::VectorXd& out) {
    residuals(problem, obs, unpack(th), out, opt.threads);
    return sum_squares(out);
  };
  auto jacobian = [&](const Eigen::VectorXd& th, Eigen::MatrixXd& J) {
    J.resize(static_cast<Eigen::Index>(obs.size() * 3), nparam);
    for (int k = 0; k < nparam; ++k) {
      Eigen::VectorXd tp = th, tm = th;
      tp[k] += opt.jacobian_step;
      tm[k] -= opt.jacobian_step;
      residuals(problem, obs, unpack(tp), r_plus, opt.threads);
      residuals(problem, obs, unpack(tm), r_minus, opt.threads);
      J.col(k) = (r_plus - r_minus) / (2.0 * opt.jacobian_step);
    }
    for (Eigen::Index i = 0; i < J.size(); ++i) {
      if (!std::isfinite(J.data()[i])) J.data()[i] = 0.0;
    }
  };

  Solve out;
  double f = eval(theta, r);
  if (!std::isfinite(f)) {
    fail(ErrorKind::kNumerical,
         "objective is not finite at the initial parameters (scaled depth <= 0 or point behind a camera)");
  }
  out.trace.push_back(f);
  double damping = opt.initial_damping;
  out.stop_reason = "max_iterations";
  int iter = 0;
  Eigen::MatrixXd J;
  for (; iter < opt.max_iterations; ++iter) {
    if (f == 0.0) {
      out.stop_reason = "zero_objective";
      break;
    }
    jacobian(theta, J);
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    bool accepted = false;
    double f_new = f;
    Eigen::VectorXd r_new;
    while (damping <= 1e16) {
      Eigen::MatrixXd Ad = A;
      for (int k = 0; k < nparam; ++k) Ad(k, k) += damping * std::max(A(k, k), 1e-12);
      const Eigen::VectorXd step = Ad.ldlt().solve(-g);
      const Eigen::VectorXd cand = theta + step;
      f_new = eval(cand, r_new);
      if (std::isfinite(f_new) && f_new < f) {
        theta = cand;
        accepted = true;
        damping = std::max(damping / 3.0, 1e-15);
        break;
      }
      damping *= 4.0;
    }
    if (!accepted) {
      out.stop_reason = "no_descent";
      break;
    }
    const double rel = (f - f_new) / f;
    f = f_new;
    r = r_new;
    out.trace.push_back(f);
    if (rel < opt.relative_tolerance) {
      ++iter;
      out.stop_reason = "relative_decrease";
      break;
    }
  }
  jacobian(theta, J);
  out.normal = J.transpose() * J;
  out.params = unpack(theta);
  out.objective = f;
  out.iterations = iter;
  return out;
}

}  // namespace detail

/// Damped least squares over (log s_k, b_k) for every view, starting from
/// s = 1, b = 0 unless `init` is given. If J^T J is numerically singular at
/// the optimum, view 0 is anchored and the solve is repeated.
inline RecoveryResult optimize_scales(const RecoveryProblem& problem,
                                      const std::optional<std::vector<ScaleShift>>& init = std::nullopt,
                                      const OptimizerOptions& opt = {}) {
  problem.validate();
  require(problem.views.size() >= 2, ErrorKind::kInvalidArgument, "insufficient views: need at least 2");
  std::size_t skipped = 0;
  const auto obs = detail::build_observations(problem, &skipped);
  require(!obs.empty(), ErrorKind::kDegenerate, "insufficient matches: no match has valid depth in both views");

  std::vector<ScaleShift> start(problem.views.size());
  if (init) {
    require(init->size() == problem.views.size(), ErrorKind::kInvalidArgument,
            "need one initial ScaleShift per view");
    start = *init;
  }

  detail::Solve solve = detail::levenberg_marquardt(problem, obs, start, false, opt);
  bool anchored = false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(solve.normal);
  const double max_eig = eig.eigenvalues().cwiseAbs().maxCoeff();
  const double min_eig = eig.eigenvalues().minCoeff();
  if (!(max_eig > 0.0) || min_eig <= opt.rank_tolerance * max_eig) {
    solve = detail::levenberg_marquardt(problem, obs, start, true, opt);
    anchored = true;
  }
  require(std::isfinite(solve.objective), ErrorKind::kNumerical, "optimizer diverged");

  RecoveryResult res;
  res.params = std::move(solve.params);
  res.objective = solve.objective;
  res.trace = std::move(solve.trace);
  res.iterations = solve.iterations;
  res.anchored = anchored;
  res.observations = obs.size();
  res.skipped_matches = skipped;
  res.stop_reason = solve.stop_reason;
  return res;
}

}  // namespace dofsplat::global_scale
