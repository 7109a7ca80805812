// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
//
// Batch front end: one subcommand per pipeline stage. Every output file is a
// pure function of (inputs, config, seed); thread count never changes bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dofsplat/dofsplat.hpp"
#include "dofsplat/fixtures.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dofsplat;

namespace {

struct GlobalFlags {
  std::string config;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

/// Subcommand-level flag values; an empty string or unset option leaves the
/// config value alone.
struct CommandFlags {
  std::string image, depth, rend, gt, cameras, matches, rendered_depth, mono_depth, stats, samples;
  std::vector<std::string> depths, rendered_depths;
  std::string family, focus_strategy;
  double focus_distance = 0.0;
  CLI::Option* focus_distance_opt = nullptr;
};

RunConfig resolve_config(const GlobalFlags& g, const CommandFlags& f) {
  RunConfig c;
  if (!g.config.empty()) c = load_config(g.config);
  if (g.seed_opt->count()) c.seed = g.seed;
  if (g.threads_opt->count()) c.threads = g.threads;
  if (g.out_opt->count()) c.out_dir = g.out_dir;
  auto over = [](std::string& dst, const std::string& src) {
    if (!src.empty()) dst = src;
  };
  auto& in = c.inputs;
  over(in.image, f.image);
  over(in.depth, f.depth);
  over(in.rend, f.rend);
  over(in.gt, f.gt);
  over(in.cameras, f.cameras);
  over(in.matches, f.matches);
  over(in.rendered_depth, f.rendered_depth);
  over(in.mono_depth, f.mono_depth);
  over(in.stats, f.stats);
  over(in.samples, f.samples);
  if (!f.depths.empty()) in.depths = f.depths;
  if (!f.rendered_depths.empty()) in.rendered_depths = f.rendered_depths;
  if (!f.family.empty()) c.kernel.family = kernels::parse_family(f.family);
  if (!f.focus_strategy.empty()) c.focus_strategy = optics::parse_focus_strategy(f.focus_strategy);
  if (f.focus_distance_opt && f.focus_distance_opt->count()) c.focus_distance = f.focus_distance;
  c.validate();
  return c;
}

std::string need(const std::string& path, const char* what) {
  require(!path.empty(), ErrorKind::kInvalidArgument, std::string("missing input: ") + what);
  return path;
}

std::string out_path(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return (fs::path(c.out_dir) / name).string();
}

void write_json(const std::string& path, json doc) {
  doc["tool_version"] = kToolVersion;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::kIo, "cannot create " + path);
  out << doc.dump(2) << "\n";
  require(out.good(), ErrorKind::kIo, "write failed: " + path);
}

optics::LensSpec lens_for(const RunConfig& c, int image_width) {
  optics::LensSpec lens = c.lens;
  lens.image_width = c.lens_image_width.value_or(image_width);
  return lens;
}

double focus_for(const RunConfig& c, const DepthMap& depth) {
  return c.focus_distance ? *c.focus_distance : optics::optimize_focus(depth, c.focus_strategy);
}

std::vector<MatchSet> filtered(const std::vector<MatchSet>& sets, double tau) {
  std::vector<MatchSet> out;
  for (const auto& s : sets) out.push_back(geo::filter_matches(s, tau));
  return out;
}

int cmd_defocus(const RunConfig& c) {
  const ImageBuffer image = io::load_image(need(c.inputs.image, "image"));
  io::DepthLoadOptions opts;
  opts.expected_size = std::pair{image.width, image.height};
  const DepthMap depth = io::load_depth(need(c.inputs.depth, "depth"), opts);
  const optics::LensSpec lens = lens_for(c, image.width);
  const double d_f = focus_for(c, depth);
  const auto plan = defocus::make_plan(depth, lens, d_f, c.kernel);
  const ImageBuffer out = defocus::apply_plan(image, plan, c.kernel, c.threads);
  io::save_image(out_path(c, "defocused.png"), out);
  write_json(out_path(c, "defocus.json"),
             {{"focus_distance", d_f},
              {"focus_strategy", c.focus_distance ? "fixed" : optics::to_string(c.focus_strategy)},
              {"family", kernels::to_string(c.kernel.family)},
              {"max_kernel_size", c.max_kernel_size()},
              {"width", image.width},
              {"height", image.height},
              {"radius_histogram", plan.radii.histogram()}});
  return 0;
}

int cmd_align_global(const RunConfig& c) {
  const auto cams = io::load_cameras(need(c.inputs.cameras, "cameras"));
  require(cams.size() >= 2, ErrorKind::kInvalidArgument,
          "insufficient views: need at least 2, got " + std::to_string(cams.size()));
  require(c.inputs.depths.size() == cams.size(), ErrorKind::kInvalidArgument,
          "need one depth per camera: got " + std::to_string(c.inputs.depths.size()) + " depths for " +
              std::to_string(cams.size()) + " cameras");
  const auto sizes = io::image_sizes(cams);
  global_scale::RecoveryProblem problem;
  for (std::size_t k = 0; k < cams.size(); ++k) {
    io::DepthLoadOptions opts;
    opts.expected_size = std::pair{cams[k].width, cams[k].height};
    problem.views.push_back({cams[k], io::load_depth(c.inputs.depths[k], opts)});
  }
  problem.matches = filtered(io::load_matches(need(c.inputs.matches, "matches"), &sizes), c.tau_conf);
  problem.lambda_ratio = c.lambda_ratio;
  problem.ratio_depth = c.ratio_depth;

  global_scale::OptimizerOptions opt;
  opt.max_iterations = c.max_iterations;
  opt.threads = c.threads;
  global_scale::RecoveryResult res;
  try {
    res = global_scale::optimize_scales(problem, std::nullopt, opt);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNumerical) throw;
    fail(e.kind(), std::string("optimizer failed: ") + e.what());
  }

  json params = json::array();
  for (std::size_t k = 0; k < cams.size(); ++k) {
    params.push_back({{"view_id", cams[k].view_id}, {"s", res.params[k].s}, {"b", res.params[k].b}});
    io::save_depth(out_path(c, "aligned_" + std::to_string(cams[k].view_id) + ".pfm"),
                   global_scale::align_depth(problem.views[k].raw, res.params[k]));
  }
  write_json(out_path(c, "params.json"),
             {{"params", params},
              {"objective", res.objective},
              {"iterations", res.iterations},
              {"anchored", res.anchored},
              {"stop_reason", res.stop_reason},
              {"observations", res.observations},
              {"skipped_matches", res.skipped_matches},
              {"ratio_depth", c.ratio_depth == global_scale::RatioDepth::kScaled ? "scaled" : "raw"}});
  write_json(out_path(c, "objective_trace.json"), {{"trace", res.trace}});
  return 0;
}

struct LocalOutputs {
  local_scale::GridSpec grid;
  std::vector<local_scale::CellFit> fits;
  local_scale::ErrorMap emap;
  local_scale::DepthConsistency loss;
};

LocalOutputs run_local(const RunConfig& c, const DepthMap& rendered, const DepthMap& mono) {
  require(rendered.same_shape(mono), ErrorKind::kDimensionMismatch,
          "rendered depth is " + std::to_string(rendered.width) + "x" + std::to_string(rendered.height) +
              " but monocular depth is " + std::to_string(mono.width) + "x" + std::to_string(mono.height));
  LocalOutputs o;
  o.grid = local_scale::build_grid(rendered.height, rendered.width, c.grid_min, c.grid_max);
  o.fits = local_scale::fit_grid(rendered, mono, o.grid, c.lambda_reg, c.threads);
  o.emap = local_scale::error_map(rendered, mono, o.grid, o.fits, c.upsampling);
  o.loss = local_scale::depth_consistency_loss(rendered, mono, o.emap, c.weights.alpha_depth_corr);
  return o;
}

int cmd_align_local(const RunConfig& c) {
  const DepthMap rendered = io::load_depth(need(c.inputs.rendered_depth, "rendered_depth"));
  const DepthMap mono = io::load_depth(need(c.inputs.mono_depth, "mono_depth"));
  const LocalOutputs o = run_local(c, rendered, mono);
  json fits = json::array();
  for (int r = 0; r < o.grid.rows; ++r) {
    for (int col = 0; col < o.grid.cols; ++col) {
      const auto& f = o.fits[static_cast<std::size_t>(r) * o.grid.cols + col];
      const auto rect = o.grid.cell(r, col);
      fits.push_back({{"row", r}, {"col", col}, {"s", f.s}, {"t", f.t}, {"E", f.E}, {"n", f.n},
                      {"usable", f.usable}, {"x0", rect.x0}, {"y0", rect.y0}, {"x1", rect.x1}, {"y1", rect.y1}});
    }
  }
  write_json(out_path(c, "fits.json"),
             {{"rows", o.grid.rows}, {"cols", o.grid.cols}, {"target_cell", o.grid.target}, {"fits", fits}});
  io::save_float_map(out_path(c, "error_map.pfm"), o.emap.width, o.emap.height, o.emap.values);
  io::save_image(out_path(c, "error_map.png"), turbo_heatmap(o.emap.width, o.emap.height, o.emap.values));
  write_json(out_path(c, "depth_loss.json"),
             {{"L_abs", o.loss.abs_term},
              {"L_corr", o.loss.corr_term},
              {"L_depth", o.loss.loss},
              {"alpha", c.weights.alpha_depth_corr},
              {"valid_pixels", o.loss.valid_pixels},
              {"invalid_pixels", o.loss.invalid_pixels},
              {"e_min", o.emap.e_min},
              {"e_max", o.emap.e_max}});
  return 0;
}

int cmd_losses(const RunConfig& c) {
  require(!c.inputs.rend.empty() && !c.inputs.gt.empty(), ErrorKind::kInvalidArgument,
          "missing mandatory rgb pair: both rend and gt images are required");
  const ImageBuffer rend = io::load_image(c.inputs.rend);
  const ImageBuffer gt = io::load_image(c.inputs.gt);
  losses::LossComponents parts;
  parts.rgb = losses::photometric_terms(rend, gt, c.weights.lambda_dssim);

  json extra = json::object();
  if (!c.inputs.depth.empty()) {
    io::DepthLoadOptions opts;
    opts.expected_size = std::pair{rend.width, rend.height};
    const DepthMap aligned = io::load_depth(c.inputs.depth, opts);
    const double d_f = focus_for(c, aligned);
    parts.dof = losses::dof_terms(rend, gt, aligned, lens_for(c, rend.width), d_f, c.kernel,
                                  c.weights.lambda_dssim_dof, c.threads);
    extra["focus_distance"] = d_f;
  }
  if (!c.inputs.matches.empty() || !c.inputs.rendered_depths.empty()) {
    const auto cams = io::load_cameras(need(c.inputs.cameras, "cameras"));
    require(c.inputs.rendered_depths.size() == cams.size(), ErrorKind::kInvalidArgument,
            "need one rendered depth per camera for the geometric term");
    const auto sizes = io::image_sizes(cams);
    const auto sets = filtered(io::load_matches(need(c.inputs.matches, "matches"), &sizes), c.tau_conf);
    std::vector<DepthMap> depths;
    for (std::size_t k = 0; k < cams.size(); ++k) {
      io::DepthLoadOptions opts;
      opts.expected_size = std::pair{cams[k].width, cams[k].height};
      depths.push_back(io::load_depth(c.inputs.rendered_depths[k], opts));
    }
    std::map<int, const DepthMap*> depth_by_view;
    std::map<int, const CameraView*> cam_by_view;
    for (std::size_t k = 0; k < cams.size(); ++k) {
      depth_by_view[cams[k].view_id] = &depths[k];
      cam_by_view[cams[k].view_id] = &cams[k];
    }
    const geo::GeometricLoss g = geo::geometric_loss(sets, depth_by_view, cam_by_view);
    parts.geo = g.value;
    extra["geo_matches_used"] = g.used;
    extra["geo_matches_skipped"] = g.skipped;
    extra["geo_no_usable_matches"] = g.no_usable_matches;
  }
  if (!c.inputs.rendered_depth.empty() || !c.inputs.mono_depth.empty()) {
    const DepthMap rendered = io::load_depth(need(c.inputs.rendered_depth, "rendered_depth"));
    const DepthMap mono = io::load_depth(need(c.inputs.mono_depth, "mono_depth"));
    parts.depth = run_local(c, rendered, mono).loss.loss;
  }

  const losses::LossReport report = losses::total_loss(parts, c.weights);
  json doc = losses::to_json(report);
  doc["weights"] = {{"lambda_dssim", c.weights.lambda_dssim},
                    {"lambda_dssim_dof", c.weights.lambda_dssim_dof},
                    {"lambda_geo", c.weights.lambda_geo},
                    {"lambda_depth", c.weights.lambda_depth},
                    {"alpha_depth_corr", c.weights.alpha_depth_corr}};
  doc["details"] = extra;
  if (report.partial) std::cerr << "dofsplat: warning: some loss terms absent; L_total covers present terms only\n";
  write_json(out_path(c, "loss_report.json"), doc);
  return 0;
}

int cmd_density(const RunConfig& c) {
  density::GaussianStats stats = density::load_stats(need(c.inputs.stats, "stats"));
  const density::Mask keep = density::keep_mask(stats.dof_grad, c.tau_keep, c.keep_rule);
  const density::Mask prune = density::prune_mask(stats, keep, c.prune);
  density::save_masks(out_path(c, "masks.bin"), keep, prune);
  if (stats.size() > 0) density::accumulate(stats, stats.dof_grad);
  density::save_stats(out_path(c, "stats_accumulated.gsta"), stats);
  std::size_t nk = 0, np = 0, both = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    nk += keep[i];
    np += prune[i];
    both += keep[i] && prune[i];
  }
  write_json(out_path(c, "density_summary.json"),
             {{"count", stats.size()},
              {"keep_count", nk},
              {"prune_count", np},
              {"keep_and_prune_count", both},
              {"tau_keep", c.tau_keep},
              {"keep_rule", c.keep_rule == density::KeepRule::kTopFraction ? "top_fraction" : "quantile_threshold"},
              {"alpha_min", c.prune.alpha_min},
              {"g_min", c.prune.grad_min}});
  return 0;
}

int cmd_render_depth(const RunConfig& c) {
  const SplatSampleBuffer buf = io::load_splat_samples(need(c.inputs.samples, "samples"));
  const DepthMap depth = geo::render_depth(buf, c.threads);
  io::save_depth(out_path(c, "depth.pfm"), depth);
  write_json(out_path(c, "render_depth.json"),
             {{"width", depth.width}, {"height", depth.height}, {"valid_pixels", depth.valid_count()}});
  return 0;
}

json inputs_json(const InputPaths& in) {
  json j = json::object();
  auto put = [&](const char* k, const std::string& v) {
    if (!v.empty()) j[k] = v;
  };
  put("image", in.image);
  put("depth", in.depth);
  put("rend", in.rend);
  put("gt", in.gt);
  put("cameras", in.cameras);
  put("matches", in.matches);
  put("rendered_depth", in.rendered_depth);
  put("mono_depth", in.mono_depth);
  put("stats", in.stats);
  put("samples", in.samples);
  if (!in.depths.empty()) j["depths"] = in.depths;
  if (!in.rendered_depths.empty()) j["rendered_depths"] = in.rendered_depths;
  return j;
}

void write_scene_config(const std::string& path, const InputPaths& in, const std::string& out_dir,
                        json extra = json::object()) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::kIo, "cannot create " + path);
  extra["inputs"] = inputs_json(in);
  extra["run"] = {{"out_dir", out_dir}};
  out << extra.dump(2) << "\n";
}

int cmd_fixtures_generate(const RunConfig& c) {
  const fs::path root(c.out_dir);
  auto dir = [&](const char* name) {
    fs::create_directories(root / name);
    return root / name;
  };
  auto p = [](const fs::path& d, const std::string& f) { return (d / f).string(); };
  json files = json::array();
  auto note = [&](const std::string& f) {
    files.push_back(fs::relative(f, root).generic_string());
    return f;
  };

  // Multi-view scale recovery.
  const auto g = dir("global");
  const auto scene = fixtures::make_global_scene(c.seed);
  io::save_cameras(note(p(g, "cameras.json")), scene.cameras);
  io::save_matches(note(p(g, "matches.csv")), scene.matches);
  InputPaths gin;
  gin.cameras = p(g, "cameras.json");
  gin.matches = p(g, "matches.csv");
  json planted = json::array();
  for (std::size_t v = 0; v < scene.cameras.size(); ++v) {
    const std::string id = std::to_string(scene.cameras[v].view_id);
    io::save_depth(note(p(g, "depth_raw_" + id + ".pfm")), scene.raw_depths[v]);
    io::save_depth(note(p(g, "depth_true_" + id + ".pfm")), scene.true_depths[v]);
    gin.depths.push_back(p(g, "depth_raw_" + id + ".pfm"));
    planted.push_back({{"view_id", scene.cameras[v].view_id}, {"s", scene.planted[v].s}, {"b", scene.planted[v].b}});
  }
  write_json(note(p(g, "planted.json")), {{"params", planted}, {"seed", c.seed}});
  write_scene_config(note(p(g, "config.json")), gin, (root / "out" / "global").string());

  // Defocus: pattern image, a two-plane depth and an on-focus depth.
  const auto d = dir("defocus");
  const int dw = 96, dh = 64;
  io::save_image(note(p(d, "image.png")), fixtures::make_pattern_image(c.seed, dw, dh));
  io::save_depth(note(p(d, "depth.pfm")), fixtures::make_two_plane_depth(dw, dh, dw / 2, 1.0f, 6.0f));
  io::save_depth(note(p(d, "depth_focus.pfm")), DepthMap(dw, dh, 2.0f));
  InputPaths din;
  din.image = p(d, "image.png");
  din.depth = p(d, "depth.pfm");
  // Full-frame sensor width in pixels so the small image still shows blur.
  write_scene_config(note(p(d, "config.json")), din, (root / "out" / "defocus").string(),
                     {{"lens", {{"image_width", 1920}}}});

  // Local alignment.
  const auto l = dir("local");
  const auto [rendered, mono] = fixtures::make_local_pair(c.seed, 160, 120);
  io::save_depth(note(p(l, "rendered.pfm")), rendered);
  io::save_depth(note(p(l, "mono.pfm")), mono);
  InputPaths lin;
  lin.rendered_depth = p(l, "rendered.pfm");
  lin.mono_depth = p(l, "mono.pfm");
  write_scene_config(note(p(l, "config.json")), lin, (root / "out" / "local").string());

  // Losses on a self-consistent scene: gt == rend, undistorted depths and
  // exact matches.
  const auto s = dir("losses");
  fixtures::GlobalSceneOptions consistent;
  consistent.distort = false;
  const auto exact = fixtures::make_global_scene(c.seed + 1, consistent);
  io::save_cameras(note(p(s, "cameras.json")), exact.cameras);
  io::save_matches(note(p(s, "matches.csv")), exact.matches);
  const ImageBuffer img = fixtures::make_pattern_image(c.seed + 1, exact.cameras[0].width, exact.cameras[0].height);
  io::save_image(note(p(s, "rend.png")), img);
  io::save_image(note(p(s, "gt.png")), img);
  InputPaths sin;
  for (std::size_t v = 0; v < exact.cameras.size(); ++v) {
    const std::string f = p(s, "depth_" + std::to_string(exact.cameras[v].view_id) + ".pfm");
    io::save_depth(note(f), exact.true_depths[v]);
    sin.rendered_depths.push_back(f);
  }
  sin.rend = p(s, "rend.png");
  sin.gt = p(s, "gt.png");
  sin.depth = sin.rendered_depths[0];
  sin.cameras = p(s, "cameras.json");
  sin.matches = p(s, "matches.csv");
  sin.rendered_depth = sin.rendered_depths[0];
  sin.mono_depth = sin.rendered_depths[0];
  write_scene_config(note(p(s, "config.json")), sin, (root / "out" / "losses").string());

  // Depth compositing.
  const auto r = dir("render");
  io::save_splat_samples(note(p(r, "samples.splb")), fixtures::make_splat_buffer(c.seed, 48, 32));
  InputPaths rin;
  rin.samples = p(r, "samples.splb");
  write_scene_config(note(p(r, "config.json")), rin, (root / "out" / "render").string());

  // Density control.
  const auto k = dir("density");
  density::save_stats(note(p(k, "stats.gsta")), fixtures::make_stats(c.seed, 1000));
  InputPaths kin;
  kin.stats = p(k, "stats.gsta");
  write_scene_config(note(p(k, "config.json")), kin, (root / "out" / "density").string());

  write_json(p(root, "manifest.json"), {{"seed", c.seed}, {"files", files}});
  return 0;
}

void add_input(CLI::App* sub, const std::string& flag, std::string& target, const std::string& help) {
  sub->add_option(flag, target, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dofsplat: defocus synthesis, depth alignment, losses and density control"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  app.add_option("--config", g.config, "JSON config file; flags override it")->check(CLI::ExistingFile);
  g.seed_opt = app.add_option("--seed", g.seed, "seed for synthetic generators");
  g.threads_opt = app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  g.out_opt = app.add_option("--out-dir", g.out_dir, "output directory");

  CommandFlags f;
  auto* defocus_cmd = app.add_subcommand("defocus", "depth-dependent defocus of one image");
  add_input(defocus_cmd, "--image", f.image, "8-bit PNG");
  add_input(defocus_cmd, "--depth", f.depth, "metric depth (PFM or 16-bit PNG)");
  defocus_cmd->add_option("--family", f.family, "gaussian | smoothstep | polygonal");
  defocus_cmd->add_option("--focus-strategy", f.focus_strategy, "median | one_third | two_thirds | mean | argmin");
  f.focus_distance_opt = defocus_cmd->add_option("--focus-distance", f.focus_distance, "fixed focus distance in meters");

  auto* global_cmd = app.add_subcommand("align-global", "recover per-view depth scale and shift");
  add_input(global_cmd, "--cameras", f.cameras, "cameras JSON");
  add_input(global_cmd, "--matches", f.matches, "matches CSV or JSONL");
  global_cmd->add_option("--depths", f.depths, "raw depth per camera, in camera order");

  auto* local_cmd = app.add_subcommand("align-local", "grid-wise depth alignment and error map");
  add_input(local_cmd, "--rendered-depth", f.rendered_depth, "rendered depth");
  add_input(local_cmd, "--mono-depth", f.mono_depth, "monocular depth");

  auto* losses_cmd = app.add_subcommand("losses", "evaluate the supervision losses");
  add_input(losses_cmd, "--rend", f.rend, "rendered image");
  add_input(losses_cmd, "--gt", f.gt, "ground-truth image");
  add_input(losses_cmd, "--depth", f.depth, "aligned depth prior for the DoF term");
  add_input(losses_cmd, "--cameras", f.cameras, "cameras JSON for the geometric term");
  add_input(losses_cmd, "--matches", f.matches, "matches for the geometric term");
  losses_cmd->add_option("--rendered-depths", f.rendered_depths, "rendered depth per camera");
  add_input(losses_cmd, "--rendered-depth", f.rendered_depth, "rendered depth for the depth term");
  add_input(losses_cmd, "--mono-depth", f.mono_depth, "monocular depth for the depth term");
  losses_cmd->add_option("--family", f.family, "kernel family for the DoF term");

  auto* density_cmd = app.add_subcommand("density", "keep and prune masks from GSTA1 statistics");
  add_input(density_cmd, "--stats", f.stats, "GSTA1 file");

  auto* render_cmd = app.add_subcommand("render-depth", "alpha-composite an SPLB1 sample buffer");
  add_input(render_cmd, "--samples", f.samples, "SPLB1 file");

  auto* fixtures_cmd = app.add_subcommand("fixtures", "synthetic test scenes");
  fixtures_cmd->require_subcommand(1);
  auto* generate_cmd = fixtures_cmd->add_subcommand("generate", "write every seeded fixture scene");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const RunConfig c = resolve_config(g, f);
    if (*defocus_cmd) return cmd_defocus(c);
    if (*global_cmd) return cmd_align_global(c);
    if (*local_cmd) return cmd_align_local(c);
    if (*losses_cmd) return cmd_losses(c);
    if (*density_cmd) return cmd_density(c);
    if (*render_cmd) return cmd_render_depth(c);
    if (*generate_cmd) return cmd_fixtures_generate(c);
  } catch (const Error& e) {
    std::cerr << "dofsplat: error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "dofsplat: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
