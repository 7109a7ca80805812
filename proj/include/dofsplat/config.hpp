// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dofsplat/density_control.hpp"
#include "dofsplat/error.hpp"
#include "dofsplat/global_scale.hpp"
#include "dofsplat/kernels.hpp"
#include "dofsplat/local_scale.hpp"
#include "dofsplat/losses.hpp"
#include "dofsplat/optics.hpp"

namespace dofsplat {

struct InputPaths {
  std::string image, depth;
  std::string rend, gt;
  std::string cameras, matches;
  std::vector<std::string> depths;
  std::vector<std::string> rendered_depths;
  std::string rendered_depth, mono_depth;
  std::string stats, samples;
};

/// Every tunable of the batch tool. JSON keys mirror the field names; any
/// key not listed here is rejected.
struct RunConfig {
  optics::LensSpec lens;
  /// When unset, the lens image width follows the input image.
  std::optional<int> lens_image_width;
  kernels::KernelSpec kernel;
  optics::FocusStrategy focus_strategy = optics::FocusStrategy::kMedian;
  std::optional<double> focus_distance;
  losses::LossWeights weights;
  int grid_min = 15;
  int grid_max = 60;
  double lambda_reg = 1e-6;
  local_scale::ErrorUpsampling upsampling = local_scale::ErrorUpsampling::kBroadcast;
  double lambda_ratio = 0.5;
  global_scale::RatioDepth ratio_depth = global_scale::RatioDepth::kScaled;
  int max_iterations = 200;
  double tau_conf = 0.5;
  double tau_keep = 0.2;
  density::KeepRule keep_rule = density::KeepRule::kTopFraction;
  density::PruneThresholds prune;
  InputPaths inputs;
  std::string out_dir = "out";
  int threads = 1;
  std::uint64_t seed = 7;

  int max_kernel_size() const { return 2 * kernel.max_radius + 1; }

  void validate() const {
    optics::LensSpec l = lens;
    l.validate();
    if (lens_image_width) require(*lens_image_width >= 1, ErrorKind::kInvalidArgument, "lens.image_width must be >= 1");
    kernel.validate();
    weights.validate();
    require(grid_min >= 1 && grid_max >= grid_min, ErrorKind::kInvalidArgument, "grid bounds need 1 <= g_min <= g_max");
    require(lambda_reg > 0.0, ErrorKind::kInvalidArgument, "grid.lambda_reg must be positive");
    require(lambda_ratio >= 0.0, ErrorKind::kInvalidArgument, "global_scale.lambda_ratio must be >= 0");
    require(max_iterations >= 1, ErrorKind::kInvalidArgument, "global_scale.max_iterations must be >= 1");
    require(tau_conf >= 0.0 && tau_conf <= 1.0, ErrorKind::kInvalidArgument, "thresholds.tau_conf must lie in [0,1]");
    require(tau_keep > 0.0 && tau_keep <= 1.0, ErrorKind::kInvalidArgument, "thresholds.tau_keep must lie in (0,1]");
    require(prune.alpha_min >= 0.0 && prune.alpha_min <= 1.0 && prune.grad_min >= 0.0, ErrorKind::kInvalidArgument,
            "prune thresholds out of range");
    require(threads >= 1, ErrorKind::kInvalidArgument, "threads must be >= 1");
    if (focus_distance) {
      require(*focus_distance > lens.focal_length, ErrorKind::kInvalidArgument,
              "focus.distance must exceed the focal length");
    }
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
  require(obj.is_object(), ErrorKind::kFormat, "config: '" + where + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    require(allowed.count(it.key()) > 0, ErrorKind::kFormat,
            "config: unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
  }
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace detail

inline void apply_config_json(RunConfig& c, const nlohmann::json& doc) {
  using detail::read;
  using detail::reject_unknown;
  try {
    reject_unknown(doc, {"lens", "kernel", "focus", "losses", "grid", "global_scale", "thresholds", "inputs", "run"}, "");
    if (doc.contains("lens")) {
      const auto& j = doc["lens"];
      reject_unknown(j, {"focal_length", "f_number", "sensor_width", "image_width"}, "lens");
      read(j, "focal_length", c.lens.focal_length);
      read(j, "f_number", c.lens.f_number);
      read(j, "sensor_width", c.lens.sensor_width);
      if (j.contains("image_width")) {
        if (j["image_width"].is_null()) {
          c.lens_image_width.reset();
        } else {
          c.lens_image_width = j["image_width"].get<int>();
        }
      }
    }
    if (doc.contains("kernel")) {
      const auto& j = doc["kernel"];
      reject_unknown(j, {"family", "max_kernel_size", "blades", "k_s"}, "kernel");
      if (j.contains("family")) c.kernel.family = kernels::parse_family(j["family"].get<std::string>());
      if (j.contains("max_kernel_size")) {
        const int size = j["max_kernel_size"].get<int>();
        require(size >= 1 && size % 2 == 1, ErrorKind::kInvalidArgument, "kernel.max_kernel_size must be odd and >= 1");
        c.kernel.max_radius = size / 2;
      }
      read(j, "blades", c.kernel.blades);
      read(j, "k_s", c.kernel.k_s);
    }
    if (doc.contains("focus")) {
      const auto& j = doc["focus"];
      reject_unknown(j, {"strategy", "distance"}, "focus");
      if (j.contains("strategy")) c.focus_strategy = optics::parse_focus_strategy(j["strategy"].get<std::string>());
      if (j.contains("distance")) {
        if (j["distance"].is_null()) {
          c.focus_distance.reset();
        } else {
          c.focus_distance = j["distance"].get<double>();
        }
      }
    }
    if (doc.contains("losses")) {
      const auto& j = doc["losses"];
      reject_unknown(j, {"lambda_dssim", "lambda_dssim_dof", "lambda_geo", "lambda_depth", "alpha_depth_corr"}, "losses");
      read(j, "lambda_dssim", c.weights.lambda_dssim);
      read(j, "lambda_dssim_dof", c.weights.lambda_dssim_dof);
      read(j, "lambda_geo", c.weights.lambda_geo);
      read(j, "lambda_depth", c.weights.lambda_depth);
      read(j, "alpha_depth_corr", c.weights.alpha_depth_corr);
    }
    if (doc.contains("grid")) {
      const auto& j = doc["grid"];
      reject_unknown(j, {"g_min", "g_max", "lambda_reg", "upsampling"}, "grid");
      read(j, "g_min", c.grid_min);
      read(j, "g_max", c.grid_max);
      read(j, "lambda_reg", c.lambda_reg);
      if (j.contains("upsampling")) {
        const auto u = j["upsampling"].get<std::string>();
        require(u == "broadcast" || u == "bilinear", ErrorKind::kInvalidArgument,
                "grid.upsampling must be 'broadcast' or 'bilinear'");
        c.upsampling = u == "broadcast" ? local_scale::ErrorUpsampling::kBroadcast
                                        : local_scale::ErrorUpsampling::kBilinear;
      }
    }
    if (doc.contains("global_scale")) {
      const auto& j = doc["global_scale"];
      reject_unknown(j, {"lambda_ratio", "ratio_depth", "max_iterations"}, "global_scale");
      read(j, "lambda_ratio", c.lambda_ratio);
      read(j, "max_iterations", c.max_iterations);
      if (j.contains("ratio_depth")) {
        const auto r = j["ratio_depth"].get<std::string>();
        require(r == "scaled" || r == "raw", ErrorKind::kInvalidArgument, "global_scale.ratio_depth must be 'scaled' or 'raw'");
        c.ratio_depth = r == "scaled" ? global_scale::RatioDepth::kScaled : global_scale::RatioDepth::kRaw;
      }
    }
    if (doc.contains("thresholds")) {
      const auto& j = doc["thresholds"];
      reject_unknown(j, {"tau_conf", "tau_keep", "alpha_min", "g_min", "keep_rule"}, "thresholds");
      read(j, "tau_conf", c.tau_conf);
      read(j, "tau_keep", c.tau_keep);
      read(j, "alpha_min", c.prune.alpha_min);
      read(j, "g_min", c.prune.grad_min);
      if (j.contains("keep_rule")) {
        const auto r = j["keep_rule"].get<std::string>();
        require(r == "top_fraction" || r == "quantile_threshold", ErrorKind::kInvalidArgument,
                "thresholds.keep_rule must be 'top_fraction' or 'quantile_threshold'");
        c.keep_rule = r == "top_fraction" ? density::KeepRule::kTopFraction : density::KeepRule::kQuantileThreshold;
      }
    }
    if (doc.contains("inputs")) {
      const auto& j = doc["inputs"];
      reject_unknown(j, {"image", "depth", "rend", "gt", "cameras", "matches", "depths", "rendered_depths",
                         "rendered_depth", "mono_depth", "stats", "samples"},
                     "inputs");
      auto& in = c.inputs;
      read(j, "image", in.image);
      read(j, "depth", in.depth);
      read(j, "rend", in.rend);
      read(j, "gt", in.gt);
      read(j, "cameras", in.cameras);
      read(j, "matches", in.matches);
      read(j, "depths", in.depths);
      read(j, "rendered_depths", in.rendered_depths);
      read(j, "rendered_depth", in.rendered_depth);
      read(j, "mono_depth", in.mono_depth);
      read(j, "stats", in.stats);
      read(j, "samples", in.samples);
    }
    if (doc.contains("run")) {
      const auto& j = doc["run"];
      reject_unknown(j, {"threads", "seed", "out_dir"}, "run");
      read(j, "threads", c.threads);
      read(j, "seed", c.seed);
      read(j, "out_dir", c.out_dir);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("config: ") + e.what());
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open config " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, path + ": " + e.what());
  }
  RunConfig c;
  apply_config_json(c, doc);
  c.validate();
  return c;
}

/// Tunables only (no paths), in the same layout the loader accepts.
inline nlohmann::json config_to_json(const RunConfig& c) {
  return {
      {"lens",
       {{"focal_length", c.lens.focal_length},
        {"f_number", c.lens.f_number},
        {"sensor_width", c.lens.sensor_width},
        {"image_width", c.lens_image_width ? nlohmann::json(*c.lens_image_width) : nlohmann::json(nullptr)}}},
      {"kernel",
       {{"family", kernels::to_string(c.kernel.family)},
        {"max_kernel_size", c.max_kernel_size()},
        {"blades", c.kernel.blades},
        {"k_s", c.kernel.k_s}}},
      {"focus",
       {{"strategy", optics::to_string(c.focus_strategy)},
        {"distance", c.focus_distance ? nlohmann::json(*c.focus_distance) : nlohmann::json(nullptr)}}},
      {"losses",
       {{"lambda_dssim", c.weights.lambda_dssim},
        {"lambda_dssim_dof", c.weights.lambda_dssim_dof},
        {"lambda_geo", c.weights.lambda_geo},
        {"lambda_depth", c.weights.lambda_depth},
        {"alpha_depth_corr", c.weights.alpha_depth_corr}}},
      {"grid",
       {{"g_min", c.grid_min},
        {"g_max", c.grid_max},
        {"lambda_reg", c.lambda_reg},
        {"upsampling", c.upsampling == local_scale::ErrorUpsampling::kBroadcast ? "broadcast" : "bilinear"}}},
      {"global_scale",
       {{"lambda_ratio", c.lambda_ratio},
        {"ratio_depth", c.ratio_depth == global_scale::RatioDepth::kScaled ? "scaled" : "raw"},
        {"max_iterations", c.max_iterations}}},
      {"thresholds",
       {{"tau_conf", c.tau_conf},
        {"tau_keep", c.tau_keep},
        {"alpha_min", c.prune.alpha_min},
        {"g_min", c.prune.grad_min},
        {"keep_rule", c.keep_rule == density::KeepRule::kTopFraction ? "top_fraction" : "quantile_threshold"}}},
      {"run", {{"threads", c.threads}, {"seed", c.seed}, {"out_dir", c.out_dir}}},
  };
}

}  // namespace dofsplat
