// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dofsplat/dofsplat.hpp"
#include "dofsplat/fixtures.hpp"
#include "test_support.hpp"

namespace dofsplat {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int status = -1;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli_suite_");
    const CliRun r = cli("--seed 7 --out-dir " + root() + " fixtures generate");
    ASSERT_EQ(r.status, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  static std::string root() { return dir_->path().string(); }
  static std::string at(const std::string& rel) { return (dir_->path() / rel).string(); }

  static CliRun cli(const std::string& args) {
    const std::string err = at("stderr.txt");
    const std::string cmd = std::string("\"") + DOFSPLAT_CLI_PATH + "\" " + args + " > /dev/null 2> \"" + err + "\"";
    const int raw = std::system(cmd.c_str());
    CliRun r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.err = testing::read_text(err);
    return r;
  }

  static json read_json(const std::string& path) { return json::parse(testing::read_text(path)); }

  // Fixture config for `scene` with `patch` merged in, written under `name`.
  static std::string patched_config(const std::string& scene, const std::string& name, const json& patch) {
    json doc = read_json(at(scene + "/config.json"));
    doc.merge_patch(patch);
    const std::string path = at(name + ".json");
    testing::write_text(path, doc.dump(2));
    return path;
  }

  static testing::TempDir* dir_;
};

testing::TempDir* CliTest::dir_ = nullptr;

TEST_F(CliTest, EveryJsonOutputCarriesToolVersion) {
  ASSERT_EQ(cli("--config " + at("density/config.json") + " density").status, 0);
  ASSERT_EQ(cli("--config " + at("render/config.json") + " render-depth").status, 0);
  for (const char* f : {"manifest.json", "global/planted.json", "out/density/density_summary.json",
                        "out/render/render_depth.json"})
    EXPECT_EQ(read_json(at(f)).value("tool_version", ""), kToolVersion) << f;
}

TEST_F(CliTest, OnFocusDefocusIsBitwiseIdentity) {
  const std::string out = at("out/onfocus");
  const CliRun r = cli("--config " + at("defocus/config.json") + " --out-dir " + out + " defocus --depth " +
                    at("defocus/depth_focus.pfm"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(testing::read_text(out + "/defocused.png"), testing::read_text(at("defocus/image.png")));
  EXPECT_EQ(io::load_image(out + "/defocused.png").data, io::load_image(at("defocus/image.png")).data);
  const json side = read_json(out + "/defocus.json");
  EXPECT_DOUBLE_EQ(side["focus_distance"].get<double>(), 2.0);
}

TEST_F(CliTest, DefocusSidecarHistogramPartitionsPixels) {
  const CliRun r = cli("--config " + at("defocus/config.json") + " defocus --family polygonal");
  ASSERT_EQ(r.status, 0) << r.err;
  const json side = read_json(at("out/defocus/defocus.json"));
  long total = 0;
  for (const auto& n : side["radius_histogram"]) total += n.get<long>();
  EXPECT_EQ(total, side["width"].get<long>() * side["height"].get<long>());
  EXPECT_EQ(side["family"], "polygonal");
  EXPECT_EQ(side["focus_strategy"], "median");
  EXPECT_EQ(side["max_kernel_size"], 7);
  const ImageBuffer in = io::load_image(at("defocus/image.png"));
  const ImageBuffer out = io::load_image(at("out/defocus/defocused.png"));
  EXPECT_EQ(out.width, in.width);
  EXPECT_EQ(out.height, in.height);
  EXPECT_NE(out.data, in.data);
}

TEST_F(CliTest, DefocusFixedFocusFlagWins) {
  const CliRun r = cli("--config " + at("defocus/config.json") + " --out-dir " + at("out/fixed") +
                    " defocus --focus-distance 6 --focus-strategy argmin");
  ASSERT_EQ(r.status, 0) << r.err;
  const json side = read_json(at("out/fixed/defocus.json"));
  EXPECT_EQ(side["focus_distance"], 6.0);
  EXPECT_EQ(side["focus_strategy"], "fixed");
}

TEST_F(CliTest, AlignGlobalRecoversPlantedParameters) {
  const CliRun r = cli("--config " + at("global/config.json") + " align-global");
  ASSERT_EQ(r.status, 0) << r.err;
  const json planted = read_json(at("global/planted.json"))["params"];
  const json got = read_json(at("out/global/params.json"));
  ASSERT_EQ(got["params"].size(), planted.size());
  for (std::size_t k = 0; k < planted.size(); ++k) {
    const double s = planted[k]["s"], b = planted[k]["b"];
    EXPECT_EQ(got["params"][k]["view_id"], planted[k]["view_id"]);
    EXPECT_NEAR(got["params"][k]["s"].get<double>(), s, 0.01 * std::abs(s));
    EXPECT_NEAR(got["params"][k]["b"].get<double>(), b, 0.01 * std::abs(b));
  }
  EXPECT_LT(got["objective"].get<double>(), 1e-6);

  const auto trace = read_json(at("out/global/objective_trace.json"))["trace"].get<std::vector<double>>();
  ASSERT_GE(trace.size(), 2u);
  for (std::size_t i = 2; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1]);

  const DepthMap raw = io::load_depth(at("global/depth_raw_1.pfm"));
  const DepthMap aligned = io::load_depth(at("out/global/aligned_1.pfm"));
  const double s = got["params"][1]["s"], b = got["params"][1]["b"];
  for (std::size_t i = 0; i < raw.data.size(); i += 97) {
    if (raw.data[i] == DepthMap::kInvalidDepth) continue;
    EXPECT_NEAR(aligned.data[i], s * raw.data[i] + b, 1e-5 * aligned.data[i]);
  }
}

TEST_F(CliTest, AlignGlobalRejectsSingleView) {
  auto cams = io::load_cameras(at("global/cameras.json"));
  cams.resize(1);
  io::save_cameras(at("one_camera.json"), cams);
  const json patch = {{"inputs", {{"cameras", at("one_camera.json")}, {"depths", {at("global/depth_raw_0.pfm")}}}}};
  const CliRun r = cli("--config " + patched_config("global", "single_view", patch) + " align-global");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("insufficient views"), std::string::npos) << r.err;
}

TEST_F(CliTest, AlignGlobalRejectsDepthCountMismatch) {
  const json patch = {{"inputs", {{"depths", {at("global/depth_raw_0.pfm")}}}}};
  const CliRun r = cli("--config " + patched_config("global", "few_depths", patch) + " align-global");
  EXPECT_NE(r.status, 0);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, AlignLocalWritesGridAndHeatmap) {
  const CliRun r = cli("--config " + at("local/config.json") + " align-local");
  ASSERT_EQ(r.status, 0) << r.err;
  const json fits = read_json(at("out/local/fits.json"));
  EXPECT_EQ(fits["fits"].size(), fits["rows"].get<std::size_t>() * fits["cols"].get<std::size_t>());
  const DepthMap rendered = io::load_depth(at("local/rendered.pfm"));
  const ImageBuffer heat = io::load_image(at("out/local/error_map.png"));
  EXPECT_EQ(heat.width, rendered.width);
  EXPECT_EQ(heat.height, rendered.height);
  EXPECT_EQ(heat.channels, 3);
  const DepthMap emap = io::load_depth(at("out/local/error_map.pfm"));
  EXPECT_EQ(emap.width, rendered.width);
  EXPECT_EQ(emap.height, rendered.height);
  long area = 0;
  for (const auto& f : fits["fits"])
    area += (f["x1"].get<long>() - f["x0"].get<long>()) * (f["y1"].get<long>() - f["y0"].get<long>());
  EXPECT_EQ(area, static_cast<long>(rendered.width) * rendered.height);
}

TEST_F(CliTest, AlignLocalIdenticalPairHasZeroAbsoluteTerm) {
  const json patch = {{"inputs", {{"mono_depth", at("local/rendered.pfm")}}}};
  const CliRun r = cli("--config " + patched_config("local", "identical", patch) + " --out-dir " + at("out/identical") +
                    " align-local");
  ASSERT_EQ(r.status, 0) << r.err;
  const json loss = read_json(at("out/identical/depth_loss.json"));
  EXPECT_EQ(loss["L_abs"].get<double>(), 0.0);
}

TEST_F(CliTest, AlignLocalRejectsShapeMismatch) {
  io::save_depth(at("small.pfm"), DepthMap(20, 20, 1.0f));
  const CliRun r = cli("--config " + at("local/config.json") + " align-local --mono-depth " + at("small.pfm"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("dimension mismatch"), std::string::npos) << r.err;
}

TEST_F(CliTest, LossesOnConsistentSceneAreZero) {
  const CliRun r = cli("--config " + at("losses/config.json") + " losses");
  ASSERT_EQ(r.status, 0) << r.err;
  const json rep = read_json(at("out/losses/loss_report.json"));
  for (const char* k : {"L_rgb", "L_dof", "L_geo", "L_depth", "L_total"}) EXPECT_NEAR(rep[k].get<double>(), 0.0, 1e-9) << k;
  EXPECT_FALSE(rep["partial"].get<bool>());
  EXPECT_EQ(rep["details"]["geo_matches_skipped"], 0);
}

TEST_F(CliTest, LambdaSweepChangesOnlyTotal) {
  io::save_image(at("random_rend.png"), fixtures::make_random_image(3, 96, 64, 3));
  json base = {{"inputs", {{"rend", at("random_rend.png")}, {"gt", at("defocus/image.png")},
                           {"depth", at("defocus/depth.pfm")}}}};
  std::vector<json> reports;
  for (double lam : {0.05, 0.5, 2.0}) {
    json cfg = base;
    cfg["losses"] = {{"lambda_geo", lam}, {"lambda_depth", lam / 10}};
    const std::string path = at("sweep_" + std::to_string(reports.size()) + ".json");
    testing::write_text(path, cfg.dump());
    const CliRun r = cli("--config " + path + " --out-dir " + at("out/sweep") + " losses");
    ASSERT_EQ(r.status, 0) << r.err;
    reports.push_back(read_json(at("out/sweep/loss_report.json")));
  }
  for (const char* k : {"L_rgb", "L_dof", "l1_rgb", "ssim_rgb", "l1_dof", "ssim_dof"})
    for (const auto& rep : reports) EXPECT_EQ(rep[k], reports[0][k]) << k;
  EXPECT_TRUE(reports[0]["L_geo"].is_null());
  EXPECT_TRUE(reports[0]["L_depth"].is_null());
  EXPECT_TRUE(reports[0]["partial"].get<bool>());
  EXPECT_GT(reports[0]["L_rgb"].get<double>(), 0.0);
  EXPECT_EQ(reports[0]["L_total"].get<double>(),
            reports[0]["L_rgb"].get<double>() + reports[0]["L_dof"].get<double>());

  // Sweeping over a report where every term is present moves only the total.
  std::vector<json> full;
  for (double lam : {0.05, 1.0}) {
    const json q = {{"losses", {{"lambda_geo", lam}, {"lambda_depth", lam}}}};
    const CliRun r = cli("--config " + patched_config("losses", "full_" + std::to_string(full.size()), q) +
                      " --out-dir " + at("out/full") + " losses");
    ASSERT_EQ(r.status, 0) << r.err;
    full.push_back(read_json(at("out/full/loss_report.json")));
  }
  for (const char* k : {"L_rgb", "L_dof", "L_geo", "L_depth"}) EXPECT_EQ(full[0][k], full[1][k]) << k;
  EXPECT_NE(full[0]["L_total"], full[1]["L_total"]);
}

TEST_F(CliTest, LossesRequireRgbPair) {
  testing::write_text(at("no_rgb.json"), json{{"inputs", {{"rend", at("defocus/image.png")}}}}.dump());
  const CliRun r = cli("--config " + at("no_rgb.json") + " --out-dir " + at("out/no_rgb") + " losses");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("rgb pair"), std::string::npos) << r.err;
}

TEST_F(CliTest, DensitySummaryMatchesMasks) {
  const CliRun r = cli("--config " + at("density/config.json") + " density");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto [keep, prune] = density::load_masks(at("out/density/masks.bin"));
  const json sum = read_json(at("out/density/density_summary.json"));
  std::size_t nk = 0, np = 0, both = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) nk += keep[i], np += prune[i], both += keep[i] && prune[i];
  EXPECT_EQ(sum["count"], keep.size());
  EXPECT_EQ(sum["keep_count"], nk);
  EXPECT_EQ(sum["prune_count"], np);
  EXPECT_EQ(sum["keep_and_prune_count"], both);
  EXPECT_EQ(nk, density::keep_count(0.2, keep.size()));

  const auto stats = density::load_stats(at("density/stats.gsta"));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const bool low_alpha = stats.opacity[i] < 0.005;
    const bool low_grad = stats.pos_grad[i] < 0.0002;
    EXPECT_EQ(prune[i], low_alpha || (low_grad && !keep[i])) << i;
  }
  const auto acc = density::load_stats(at("out/density/stats_accumulated.gsta"));
  auto expect = stats;
  density::accumulate(expect, expect.dof_grad);
  for (std::size_t i = 0; i < acc.size(); ++i) EXPECT_FLOAT_EQ(acc.accum[i], static_cast<float>(expect.accum[i]));
}

TEST_F(CliTest, DensityFullKeepFraction) {
  const CliRun r = cli("--config " + patched_config("density", "tau_one", {{"thresholds", {{"tau_keep", 1.0}}}}) +
                    " --out-dir " + at("out/tau_one") + " density");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(read_json(at("out/tau_one/density_summary.json"))["keep_count"], 1000);
}

TEST_F(CliTest, DensityRejectsMalformedStats) {
  testing::write_text(at("bad.gsta"), "GSTA1\x05");
  const CliRun r = cli("--out-dir " + at("out/bad") + " density --stats " + at("bad.gsta"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("format"), std::string::npos) << r.err;
}

TEST_F(CliTest, RenderDepthMatchesLibrary) {
  const CliRun r = cli("--config " + at("render/config.json") + " render-depth");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto buf = io::load_splat_samples(at("render/samples.splb"));
  const DepthMap lib = geo::render_depth(buf);
  const DepthMap out = io::load_depth(at("out/render/depth.pfm"));
  EXPECT_EQ(out.width, buf.width());
  EXPECT_EQ(out.height, buf.height());
  EXPECT_EQ(out.data, lib.data);
  EXPECT_EQ(read_json(at("out/render/render_depth.json"))["valid_pixels"], lib.valid_count());
}

TEST_F(CliTest, RenderDepthOpaqueBufferIsConstant) {
  const int w = 9, h = 5;
  std::vector<std::vector<SplatSample>> lists(w * h, std::vector<SplatSample>{{1.0f, 2.75f}});
  io::save_splat_samples(at("opaque.splb"), SplatSampleBuffer::from_lists(w, h, lists));
  const CliRun r = cli("--out-dir " + at("out/opaque") + " render-depth --samples " + at("opaque.splb"));
  ASSERT_EQ(r.status, 0) << r.err;
  const DepthMap out = io::load_depth(at("out/opaque/depth.pfm"));
  EXPECT_EQ(out.width, w);
  EXPECT_EQ(out.height, h);
  for (float v : out.data) EXPECT_EQ(v, 2.75f);
}

TEST_F(CliTest, UnknownConfigKeyIsRejected) {
  testing::write_text(at("typo.json"), R"({"thresholds": {"tau_kep": 0.3}})");
  const CliRun r = cli("--config " + at("typo.json") + " density --stats " + at("density/stats.gsta"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("tau_kep"), std::string::npos) << r.err;
}

TEST_F(CliTest, OutputsAreIdenticalAcrossRunsAndThreads) {
  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"defocus", "defocus"}, {"global", "align-global"}, {"local", "align-local"},
      {"losses", "losses"},   {"density", "density"},     {"render", "render-depth"}};
  for (const auto& [scene, cmd] : cmds) {
    std::vector<std::string> seen;
    for (const char* threads : {"1", "1", "4"}) {
      const std::string out = at("out/det_" + scene + "_" + std::to_string(seen.size()));
      const CliRun r = cli("--config " + at(scene + "/config.json") + " --threads " + threads + " --out-dir " + out + " " + cmd);
      ASSERT_EQ(r.status, 0) << cmd << ": " << r.err;
      std::string blob;
      std::vector<fs::path> files(fs::directory_iterator(out), fs::directory_iterator{});
      std::sort(files.begin(), files.end());
      for (const auto& f : files) blob += f.filename().string() + "\n" + testing::read_text(f.string());
      seen.push_back(blob);
    }
    EXPECT_EQ(seen[0], seen[1]) << cmd;
    EXPECT_EQ(seen[0], seen[2]) << cmd;
  }
}

}  // namespace
}  // namespace dofsplat
