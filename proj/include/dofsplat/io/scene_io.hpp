// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dofsplat/camera.hpp"
#include "dofsplat/error.hpp"
#include "dofsplat/image.hpp"
#include "dofsplat/io/binary.hpp"
#include "dofsplat/io/pfm.hpp"
#include "dofsplat/io/png.hpp"
#include "dofsplat/matches.hpp"
#include "dofsplat/splat_samples.hpp"

namespace dofsplat::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Images

inline ImageBuffer load_image(const std::string& path) {
  require(fs::exists(path), ErrorKind::kIo, "missing image file " + path);
  const PngRaster raster = read_png(path);
  if (raster.bit_depth != 8) {
    fail(ErrorKind::kFormat, path + ": unsupported bit depth " + std::to_string(raster.bit_depth) +
                                 " for color images (8-bit only)");
  }
  ImageBuffer img(raster.width, raster.height, raster.channels);
  for (std::size_t i = 0; i < raster.samples.size(); ++i) {
    img.data[i] = static_cast<float>(raster.samples[i] / 255.0);
  }
  return img;
}

inline std::uint8_t quantize_u8(float v) {
  const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

inline void save_image(const std::string& path, const ImageBuffer& img) {
  img.validate();
  PngRaster raster{img.width, img.height, img.channels, 8, {}};
  raster.samples.resize(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) raster.samples[i] = quantize_u8(img.data[i]);
  write_png(path, raster);
}

// ---------------------------------------------------------------------------
// Depth maps

struct DepthLoadOptions {
  /// Scale for 16-bit PNG depth. When unset, read from "<path>.json"
  /// (`{"meters_per_unit": ...}`).
  std::optional<double> meters_per_unit;
  /// Paired loading: require these dimensions (e.g. of the matching image).
  std::optional<std::pair<int, int>> expected_size;
};

inline double read_depth_sidecar(const std::string& png_path) {
  const std::string sidecar = png_path + ".json";
  require(fs::exists(sidecar), ErrorKind::kIo,
          png_path + ": 16-bit depth PNG needs meters_per_unit (sidecar " + sidecar + " missing)");
  std::ifstream in(sidecar);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, sidecar + ": " + e.what());
  }
  require(j.is_object() && j.contains("meters_per_unit") && j["meters_per_unit"].is_number(),
          ErrorKind::kFormat, sidecar + ": expected numeric meters_per_unit");
  const double scale = j["meters_per_unit"].get<double>();
  require(scale > 0.0 && std::isfinite(scale), ErrorKind::kFormat,
          sidecar + ": meters_per_unit must be positive");
  return scale;
}

inline DepthMap load_depth(const std::string& path, const DepthLoadOptions& opts = {}) {
  require(fs::exists(path), ErrorKind::kIo, "missing depth file " + path);
  DepthMap depth;
  const std::string ext = fs::path(path).extension().string();
  if (ext == ".png" || ext == ".PNG") {
    const PngRaster raster = read_png(path);
    require(raster.bit_depth == 16 && raster.channels == 1, ErrorKind::kFormat,
            path + ": depth PNG must be 16-bit grayscale");
    const double scale = opts.meters_per_unit ? *opts.meters_per_unit : read_depth_sidecar(path);
    depth = DepthMap(raster.width, raster.height);
    for (std::size_t i = 0; i < raster.samples.size(); ++i) {
      depth.data[i] = static_cast<float>(raster.samples[i] * scale);
    }
  } else {
    FloatRaster r = read_pfm(path);
    depth.width = r.width;
    depth.height = r.height;
    depth.data = std::move(r.data);
  }
  depth.canonicalize();
  if (opts.expected_size) {
    const auto [w, h] = *opts.expected_size;
    require(depth.width == w && depth.height == h, ErrorKind::kDimensionMismatch,
            path + ": depth is " + std::to_string(depth.width) + "x" + std::to_string(depth.height) +
                ", expected " + std::to_string(w) + "x" + std::to_string(h));
  }
  return depth;
}

inline void save_depth(const std::string& path, const DepthMap& depth) {
  FloatRaster r{depth.width, depth.height, depth.data};
  for (float& v : r.data) {
    if (!DepthMap::is_valid_value(v)) v = DepthMap::kInvalidDepth;
  }
  write_pfm(path, r);
}

inline void save_float_map(const std::string& path, int width, int height, const std::vector<float>& values) {
  write_pfm(path, FloatRaster{width, height, values});
}

// ---------------------------------------------------------------------------
// Cameras

inline Eigen::Matrix3d matrix_from_json(const nlohmann::json& j, const std::string& what) {
  require(j.is_array() && j.size() == 9, ErrorKind::kFormat, what + " must be 9 numbers");
  Eigen::Matrix3d m;
  for (int k = 0; k < 9; ++k) m(k / 3, k % 3) = j.at(k).get<double>();
  return m;
}

inline std::vector<CameraView> parse_cameras(const nlohmann::json& doc, const std::string& what) {
  require(doc.is_array(), ErrorKind::kFormat, what + ": expected an array of cameras");
  std::vector<CameraView> cams;
  try {
    for (const auto& e : doc) {
      CameraView c;
      c.view_id = e.at("view_id").get<int>();
      const std::string who = what + ": view " + std::to_string(c.view_id);
      c.K = matrix_from_json(e.at("K"), who + " K");
      c.R = matrix_from_json(e.at("R"), who + " R");
      const auto& t = e.at("t");
      require(t.is_array() && t.size() == 3, ErrorKind::kFormat, who + " t must be 3 numbers");
      c.t = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
      c.width = e.at("width").get<int>();
      c.height = e.at("height").get<int>();
      c.validate();
      for (const auto& prev : cams) {
        require(prev.view_id != c.view_id, ErrorKind::kFormat, who + " duplicated");
      }
      cams.push_back(c);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, what + ": " + e.what());
  }
  return cams;
}

inline std::vector<CameraView> load_cameras(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, path + ": " + e.what());
  }
  return parse_cameras(doc, path);
}

inline nlohmann::json cameras_to_json(const std::vector<CameraView>& cams) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cams) {
    nlohmann::json K = nlohmann::json::array(), R = nlohmann::json::array();
    for (int k = 0; k < 9; ++k) {
      K.push_back(c.K(k / 3, k % 3));
      R.push_back(c.R(k / 3, k % 3));
    }
    arr.push_back({{"view_id", c.view_id}, {"K", K}, {"R", R},
                   {"t", {c.t.x(), c.t.y(), c.t.z()}}, {"width", c.width}, {"height", c.height}});
  }
  return arr;
}

inline void save_cameras(const std::string& path, const std::vector<CameraView>& cams) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorKind::kIo, "cannot create " + path);
  out << cameras_to_json(cams).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Matches

using ImageSizes = std::map<int, std::pair<int, int>>;

inline ImageSizes image_sizes(const std::vector<CameraView>& cams) {
  ImageSizes sizes;
  for (const auto& c : cams) sizes[c.view_id] = {c.width, c.height};
  return sizes;
}

namespace detail {

struct MatchRecord {
  int view_i, view_j;
  double x_i, y_i, x_j, y_j, conf;
};

inline void check_record(const MatchRecord& r, const ImageSizes* sizes, const std::string& where) {
  for (double v : {r.x_i, r.y_i, r.x_j, r.y_j, r.conf}) {
    require(std::isfinite(v), ErrorKind::kFormat, where + ": non-finite value");
  }
  if (!(r.conf >= 0.0 && r.conf <= 1.0)) {
    std::ostringstream msg;
    msg << where << ": confidence " << r.conf << " outside [0,1]";
    fail(ErrorKind::kFormat, msg.str());
  }
  require(r.view_i != r.view_j, ErrorKind::kFormat, where + ": match pairs a view with itself");
  if (!sizes) return;
  auto in_bounds = [&](int view, double x, double y) {
    const auto it = sizes->find(view);
    require(it != sizes->end(), ErrorKind::kFormat,
            where + ": unknown view " + std::to_string(view));
    const auto [w, h] = it->second;
    if (!(x >= -0.5 && y >= -0.5 && x <= w - 0.5 && y <= h - 0.5)) {
      std::ostringstream msg;
      msg << where << ": coordinate (" << x << ", " << y << ") outside view " << view << " ("
          << w << "x" << h << ")";
      fail(ErrorKind::kFormat, msg.str());
    }
  };
  in_bounds(r.view_i, r.x_i, r.y_i);
  in_bounds(r.view_j, r.x_j, r.y_j);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace detail

inline constexpr const char* kMatchCsvHeader = "view_i,view_j,x_i,y_i,x_j,y_j,conf";

/// Loads CSV (with header) or JSON-lines (`.jsonl`) correspondences and groups
/// them by ordered view pair. With `sizes`, coordinates are bounds-checked.
inline std::vector<MatchSet> load_matches(const std::string& path, const ImageSizes* sizes = nullptr) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open " + path);
  const bool jsonl = fs::path(path).extension() == ".jsonl";

  std::map<std::pair<int, int>, MatchSet> groups;
  std::string line;
  int lineno = 0;
  bool header_seen = jsonl;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    detail::MatchRecord r{};
    if (jsonl) {
      try {
        const auto j = nlohmann::json::parse(line);
        r = {j.at("view_i").get<int>(), j.at("view_j").get<int>(), j.at("x_i").get<double>(),
             j.at("y_i").get<double>(), j.at("x_j").get<double>(), j.at("y_j").get<double>(),
             j.contains("conf") ? j.at("conf").get<double>() : j.at("confidence").get<double>()};
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::kFormat, where + ": " + e.what());
      }
    } else {
      const auto cells = detail::split_csv(line);
      if (!header_seen) {
        std::string joined;
        for (std::size_t k = 0; k < cells.size(); ++k) joined += (k ? "," : "") + cells[k];
        require(joined == kMatchCsvHeader, ErrorKind::kFormat,
                where + ": expected header '" + std::string(kMatchCsvHeader) + "'");
        header_seen = true;
        continue;
      }
      require(cells.size() == 7, ErrorKind::kFormat, where + ": expected 7 fields");
      try {
        std::size_t used = 0;
        auto to_int = [&](const std::string& s) {
          const int v = std::stoi(s, &used);
          if (used != s.size()) throw std::invalid_argument(s);
          return v;
        };
        auto to_double = [&](const std::string& s) {
          const double v = std::stod(s, &used);
          if (used != s.size()) throw std::invalid_argument(s);
          return v;
        };
        r = {to_int(cells[0]), to_int(cells[1]), to_double(cells[2]), to_double(cells[3]),
             to_double(cells[4]), to_double(cells[5]), to_double(cells[6])};
      } catch (const std::exception&) {
        fail(ErrorKind::kFormat, where + ": malformed number");
      }
    }
    detail::check_record(r, sizes, where);
    auto& set = groups[{r.view_i, r.view_j}];
    set.view_i = r.view_i;
    set.view_j = r.view_j;
    set.matches.push_back({{r.x_i, r.y_i}, {r.x_j, r.y_j}, r.conf});
  }

  std::vector<MatchSet> out;
  out.reserve(groups.size());
  for (auto& [key, set] : groups) out.push_back(std::move(set));
  return out;
}

inline void save_matches(const std::string& path, const std::vector<MatchSet>& sets) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorKind::kIo, "cannot create " + path);
  out << kMatchCsvHeader << '\n';
  out.precision(17);
  for (const auto& s : sets) {
    for (const auto& m : s.matches) {
      out << s.view_i << ',' << s.view_j << ',' << m.p_i.x() << ',' << m.p_i.y() << ','
          << m.p_j.x() << ',' << m.p_j.y() << ',' << m.confidence << '\n';
    }
  }
  require(out.good(), ErrorKind::kIo, "write failed: " + path);
}

// ---------------------------------------------------------------------------
// Splat sample buffers (SPLB1)

inline constexpr const char* kSplatMagic = "SPLB1";

inline SplatSampleBuffer load_splat_samples(const std::string& path) {
  ByteReader rd = ByteReader::from_file(path, "SPLB1 buffer");
  rd.expect_magic(kSplatMagic);
  const std::uint32_t w = rd.u32();
  const std::uint32_t h = rd.u32();
  require(static_cast<std::uint64_t>(w) * h <= (1ull << 31), ErrorKind::kFormat,
          rd.what() + ": implausible size");
  std::vector<std::vector<SplatSample>> lists(static_cast<std::size_t>(w) * h);
  for (auto& list : lists) {
    const std::uint16_t count = rd.u16();
    list.resize(count);
    for (auto& s : list) {
      s.alpha = rd.f32();
      s.depth = rd.f32();
      if (!(std::isfinite(s.alpha) && s.alpha >= 0.0f && s.alpha <= 1.0f)) {
        fail(ErrorKind::kFormat, rd.what() + ": alpha outside [0,1]");
      }
      if (!(std::isfinite(s.depth) && s.depth > 0.0f)) {
        fail(ErrorKind::kFormat, rd.what() + ": non-positive sample depth");
      }
    }
  }
  require(rd.at_end(), ErrorKind::kFormat, rd.what() + ": trailing bytes");
  return SplatSampleBuffer::from_lists(static_cast<int>(w), static_cast<int>(h), lists);
}

inline void save_splat_samples(const std::string& path, const SplatSampleBuffer& buf) {
  ByteWriter wr;
  wr.bytes(kSplatMagic);
  wr.u32(static_cast<std::uint32_t>(buf.width()));
  wr.u32(static_cast<std::uint32_t>(buf.height()));
  for (std::size_t i = 0; i < buf.pixel_count(); ++i) {
    const auto px = buf.pixel(i);
    require(px.size() <= 0xffff, ErrorKind::kInvalidArgument, "more than 65535 samples in a pixel");
    wr.u16(static_cast<std::uint16_t>(px.size()));
    for (const auto& s : px) {
      wr.f32(s.alpha);
      wr.f32(s.depth);
    }
  }
  wr.save(path);
}

}  // namespace dofsplat::io
