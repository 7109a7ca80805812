// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "dofsplat/camera.hpp"
#include "dofsplat/density_control.hpp"
#include "dofsplat/global_scale.hpp"
#include "dofsplat/image.hpp"
#include "dofsplat/matches.hpp"
#include "dofsplat/splat_samples.hpp"

/// Seeded synthetic scenes. Draws use only mt19937_64 raw output, so a seed
/// yields the same scene on every standard library.
namespace dofsplat::fixtures {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal() {
    const double u1 = 1.0 - unit();
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Camera at `eye` looking at `target` with image-down roughly along -up.
inline CameraView look_at(int view_id, const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                          const Eigen::Matrix3d& K, int width, int height) {
  const Eigen::Vector3d z = (target - eye).normalized();
  const Eigen::Vector3d up(0.0, -1.0, 0.0);
  const Eigen::Vector3d x = up.cross(z).normalized() * -1.0;
  const Eigen::Vector3d y = z.cross(x);
  CameraView cam;
  cam.view_id = view_id;
  cam.K = K;
  cam.R.row(0) = x.transpose();
  cam.R.row(1) = y.transpose();
  cam.R.row(2) = z.transpose();
  cam.t = -cam.R * eye;
  cam.width = width;
  cam.height = height;
  return cam;
}

struct GlobalSceneOptions {
  int views = 4;
  int matches = 500;
  int width = 640;
  int height = 480;
  double planted_s_min = 0.5, planted_s_max = 3.0;
  double planted_b_min = -0.5, planted_b_max = 0.5;
  /// Gaussian pixel noise added to p_j of a random subset of matches.
  double noise_sigma_px = 0.0;
  double noise_fraction = 0.0;
  /// When false, planted parameters are s = 1, b = 0 (already consistent).
  bool distort = true;
};

struct GlobalScene {
  std::vector<CameraView> cameras;
  std::vector<DepthMap> true_depths;
  std::vector<DepthMap> raw_depths;
  std::vector<MatchSet> matches;
  std::vector<global_scale::ScaleShift> planted;

  global_scale::RecoveryProblem problem(double lambda_ratio = 0.5) const {
    global_scale::RecoveryProblem p;
    for (std::size_t v = 0; v < cameras.size(); ++v) p.views.push_back({cameras[v], raw_depths[v]});
    p.matches = matches;
    p.lambda_ratio = lambda_ratio;
    return p;
  }
};

/// Multi-view scene with exactly consistent depths. Each correspondence is a
/// world point whose camera depths in both views equal s * raw + b exactly
/// for the stored float raw values, and every pixel the bilinear lookup
/// touches around a match carries that value, so the objective vanishes at
/// the planted parameters up to double rounding.
inline GlobalScene make_global_scene(std::uint64_t seed, const GlobalSceneOptions& opt = {}) {
  Rng rng(seed);
  GlobalScene scene;
  const int V = opt.views, W = opt.width, H = opt.height;
  Eigen::Matrix3d K;
  K << 525.0, 0.0, (W - 1) / 2.0, 0.0, 525.0, (H - 1) / 2.0, 0.0, 0.0, 1.0;
  for (int v = 0; v < V; ++v) {
    const double angle = V > 1 ? -0.5 + 1.0 * v / (V - 1) : 0.0;  // radians, about +-29 deg
    const Eigen::Vector3d eye(6.0 * std::sin(angle), 0.3 * std::sin(3.0 * angle), -6.0 * std::cos(angle));
    scene.cameras.push_back(look_at(v, eye, Eigen::Vector3d::Zero(), K, W, H));
    if (opt.distort) {
      scene.planted.push_back({rng.uniform(opt.planted_s_min, opt.planted_s_max),
                               rng.uniform(opt.planted_b_min, opt.planted_b_max)});
    } else {
      scene.planted.push_back({1.0, 0.0});
    }
  }

  // Background: a tilted wall behind the scene, depth along each camera's z.
  for (int v = 0; v < V; ++v) {
    const auto& cam = scene.cameras[v];
    DepthMap raw(W, H);
    DepthMap truth(W, H);
    const Eigen::Vector3d n(0.0, 0.0, 1.0);
    const Eigen::Vector3d wall_point(0.0, 0.0, 3.0);
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const Eigen::Vector3d dir = cam.R.transpose() * cam.ray(x, y);  // world direction, unit cam-z
        const Eigen::Vector3d eye = -cam.R.transpose() * cam.t;
        const double lambda = n.dot(wall_point - eye) / n.dot(dir);
        const double z = lambda > 0.0 ? lambda : 9.0;
        const auto r = static_cast<float>((z - scene.planted[v].b) / scene.planted[v].s);
        raw.at(x, y) = r;
        truth.at(x, y) = static_cast<float>(scene.planted[v].s * r + scene.planted[v].b);
      }
    }
    scene.raw_depths.push_back(std::move(raw));
    scene.true_depths.push_back(std::move(truth));
  }

  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < V; ++a) {
    for (int b = a + 1; b < V; ++b) pairs.emplace_back(a, b);
  }
  std::vector<std::vector<std::uint8_t>> occupied(V, std::vector<std::uint8_t>(static_cast<std::size_t>(W) * H, 0));
  auto block_free = [&](int v, const Eigen::Vector2d& p) {
    const int x0 = static_cast<int>(std::floor(p.x())), y0 = static_cast<int>(std::floor(p.y()));
    if (x0 < 2 || y0 < 2 || x0 + 3 >= W || y0 + 3 >= H) return false;
    for (int y = y0 - 1; y <= y0 + 2; ++y) {
      for (int x = x0 - 1; x <= x0 + 2; ++x) {
        if (occupied[v][static_cast<std::size_t>(y) * W + x]) return false;
      }
    }
    return true;
  };
  auto stamp = [&](int v, const Eigen::Vector2d& p, float raw) {
    const int x0 = static_cast<int>(std::floor(p.x())), y0 = static_cast<int>(std::floor(p.y()));
    for (int y = y0; y <= y0 + 1; ++y) {
      for (int x = x0; x <= x0 + 1; ++x) {
        scene.raw_depths[v].at(x, y) = raw;
        scene.true_depths[v].at(x, y) = static_cast<float>(scene.planted[v].s * raw + scene.planted[v].b);
      }
    }
    for (int y = y0 - 1; y <= y0 + 2; ++y) {
      for (int x = x0 - 1; x <= x0 + 2; ++x) occupied[v][static_cast<std::size_t>(y) * W + x] = 1;
    }
  };

  for (const auto& [a, b] : pairs) scene.matches.push_back({a, b, {}});
  int made = 0;
  int attempts = 0;
  while (made < opt.matches) {
    require(++attempts < 200 * opt.matches, ErrorKind::kDegenerate, "fixture generator could not place matches");
    const std::size_t pair_index = static_cast<std::size_t>(made) % pairs.size();
    const auto [a, b] = pairs[pair_index];
    const auto& ca = scene.cameras[a];
    const auto& cb = scene.cameras[b];
    const Eigen::Vector3d q(rng.uniform(-1.5, 1.5), rng.uniform(-1.2, 1.2), rng.uniform(-1.5, 1.5));
    const double za_q = ca.world_to_camera(q).z();
    const double zb_q = cb.world_to_camera(q).z();
    const auto& pa = scene.planted[a];
    const auto& pb = scene.planted[b];
    const auto raw_a = static_cast<float>((za_q - pa.b) / pa.s);
    const auto raw_b = static_cast<float>((zb_q - pb.b) / pb.s);
    if (!(raw_a > 0.0f && raw_b > 0.0f)) continue;
    // Closest point to q whose camera depths are exactly s * raw + b.
    Eigen::Matrix<double, 2, 3> A;
    A.row(0) = ca.R.row(2);
    A.row(1) = cb.R.row(2);
    const Eigen::Vector2d d(pa.s * raw_a + pa.b - ca.t.z(), pb.s * raw_b + pb.b - cb.t.z());
    const Eigen::Vector3d P = q + A.transpose() * (A * A.transpose()).inverse() * (d - A * q);
    const auto uva = ca.project_world(P);
    const auto uvb = cb.project_world(P);
    if (!uva || !uvb || !block_free(a, *uva) || !block_free(b, *uvb)) continue;
    stamp(a, *uva, raw_a);
    stamp(b, *uvb, raw_b);
    scene.matches[pair_index].matches.push_back({*uva, *uvb, rng.uniform(0.5, 1.0)});
    ++made;
  }

  if (opt.noise_sigma_px > 0.0 && opt.noise_fraction > 0.0) {
    for (auto& set : scene.matches) {
      for (auto& m : set.matches) {
        if (rng.unit() >= opt.noise_fraction) continue;
        const Eigen::Vector2d moved =
            m.p_j + opt.noise_sigma_px * Eigen::Vector2d(rng.normal(), rng.normal());
        if (moved.x() > 1.0 && moved.y() > 1.0 && moved.x() < W - 2.0 && moved.y() < H - 2.0) m.p_j = moved;
      }
    }
  }
  return scene;
}

/// RGB test pattern: smooth gradients plus a checkerboard.
inline ImageBuffer make_pattern_image(std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  ImageBuffer img(width, height, 3);
  const double phase = rng.uniform(0.0, 6.28);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const bool check = ((x / 4) + (y / 4)) % 2 == 0;
      img.at(x, y, 0) = static_cast<float>(0.5 + 0.4 * std::sin(0.21 * x + phase));
      img.at(x, y, 1) = check ? 0.85f : 0.15f;
      img.at(x, y, 2) = static_cast<float>(static_cast<double>(y) / std::max(1, height - 1));
    }
  }
  return img;
}

/// Uniform random image quantized to 8 bits so it survives a PNG round trip.
inline ImageBuffer make_random_image(std::uint64_t seed, int width, int height, int channels) {
  Rng rng(seed);
  ImageBuffer img(width, height, channels);
  for (float& v : img.data) v = static_cast<float>(rng.uniform_int(0, 255) / 255.0);
  return img;
}

/// Two depth planes split by a vertical edge at x = split.
inline DepthMap make_two_plane_depth(int width, int height, int split, float near, float far) {
  DepthMap d(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) d.at(x, y) = x < split ? near : far;
  }
  return d;
}

/// Random per-pixel sample lists with 0..max_samples entries, front-to-back.
inline SplatSampleBuffer make_splat_buffer(std::uint64_t seed, int width, int height, int max_samples = 5) {
  Rng rng(seed);
  std::vector<std::vector<SplatSample>> lists(static_cast<std::size_t>(width) * height);
  for (auto& list : lists) {
    const int k = rng.uniform_int(0, max_samples);
    double depth = rng.uniform(0.5, 2.0);
    for (int i = 0; i < k; ++i) {
      list.push_back({static_cast<float>(rng.unit()), static_cast<float>(depth)});
      depth += rng.uniform(0.05, 1.5);
    }
  }
  return SplatSampleBuffer::from_lists(width, height, lists);
}

/// Rendered and monocular depth pair: the monocular map is a different affine
/// distortion of the rendered map per quadrant, with noise and holes.
inline std::pair<DepthMap, DepthMap> make_local_pair(std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  DepthMap rendered(width, height), mono(width, height);
  double s[4], t[4];
  for (int k = 0; k < 4; ++k) {
    s[k] = rng.uniform(0.6, 1.6);
    t[k] = rng.uniform(-0.4, 0.4);
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double z = 3.0 + 2.0 * std::sin(0.03 * x) * std::cos(0.02 * y) + 0.01 * x;
      rendered.at(x, y) = static_cast<float>(z);
      const int q = (x < width / 2 ? 0 : 1) + (y < height / 2 ? 0 : 2);
      const double m = s[q] * z + t[q] + 0.01 * rng.normal();
      mono.at(x, y) = rng.unit() < 0.03 ? DepthMap::kInvalidDepth : static_cast<float>(m);
    }
  }
  mono.canonicalize();
  return {rendered, mono};
}

inline density::GaussianStats make_stats(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  density::GaussianStats s;
  s.opacity.resize(n);
  s.pos_grad.resize(n);
  s.dof_grad.resize(n);
  s.accum.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.opacity[i] = static_cast<float>(rng.unit() < 0.1 ? rng.uniform(0.0, 0.01) : rng.unit());
    s.pos_grad[i] = static_cast<float>(rng.uniform(0.0, 0.0006));
    // Coarse quantization produces ties.
    s.dof_grad[i] = static_cast<float>(std::floor(rng.uniform(0.0, 50.0)) * 1e-4);
    s.accum[i] = static_cast<float>(rng.uniform(0.0, 0.01));
  }
  return s;
}

}  // namespace dofsplat::fixtures
