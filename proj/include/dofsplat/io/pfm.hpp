// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dofsplat/error.hpp"

namespace dofsplat::io {

/// Single-channel float raster, top row first.
struct FloatRaster {
  int width = 0;
  int height = 0;
  std::vector<float> data;
};

/// Reads a grayscale ("Pf") PFM. A negative scale marks little-endian data;
/// rows are stored bottom-to-top on disk.
inline FloatRaster read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kIo, "cannot open " + path);

  auto token = [&]() {
    std::string tok;
    char c;
    while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
    }
    if (!in) return tok;
    tok.push_back(c);
    while (in.get(c) && !std::isspace(static_cast<unsigned char>(c))) tok.push_back(c);
    return tok;  // the single whitespace after the token has been consumed
  };

  const std::string magic = token();
  if (magic == "PF") fail(ErrorKind::kFormat, path + ": color PFM is not a depth map");
  require(magic == "Pf", ErrorKind::kFormat, path + ": not a grayscale PFM");
  FloatRaster r;
  double scale = 0.0;
  try {
    r.width = std::stoi(token());
    r.height = std::stoi(token());
    scale = std::stod(token());
  } catch (const std::exception&) {
    fail(ErrorKind::kFormat, path + ": malformed PFM header");
  }
  require(r.width > 0 && r.height > 0, ErrorKind::kFormat, path + ": non-positive PFM size");
  require(scale != 0.0, ErrorKind::kFormat, path + ": PFM scale must be non-zero");
  const bool little = scale < 0.0;

  const std::size_t n = static_cast<std::size_t>(r.width) * r.height;
  std::vector<unsigned char> raw(n * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  require(static_cast<std::size_t>(in.gcount()) == raw.size(), ErrorKind::kFormat,
          path + ": truncated PFM data");

  r.data.resize(n);
  for (int row = 0; row < r.height; ++row) {
    const int y = r.height - 1 - row;
    for (int x = 0; x < r.width; ++x) {
      const unsigned char* b = raw.data() + (static_cast<std::size_t>(row) * r.width + x) * 4;
      std::uint32_t bits = little
          ? (std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24)
          : (std::uint32_t(b[3]) | std::uint32_t(b[2]) << 8 | std::uint32_t(b[1]) << 16 | std::uint32_t(b[0]) << 24);
      r.data[static_cast<std::size_t>(y) * r.width + x] = std::bit_cast<float>(bits);
    }
  }
  return r;
}

/// Writes a little-endian grayscale PFM (scale -1).
inline void write_pfm(const std::string& path, const FloatRaster& r) {
  require(r.data.size() == static_cast<std::size_t>(r.width) * r.height,
          ErrorKind::kInvalidArgument, "PFM raster size mismatch");
  std::ostringstream header;
  header << "Pf\n" << r.width << ' ' << r.height << "\n-1\n";
  std::vector<char> out;
  const std::string h = header.str();
  out.insert(out.end(), h.begin(), h.end());
  for (int row = 0; row < r.height; ++row) {
    const int y = r.height - 1 - row;
    for (int x = 0; x < r.width; ++x) {
      const auto bits = std::bit_cast<std::uint32_t>(r.data[static_cast<std::size_t>(y) * r.width + x]);
      for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(f.good(), ErrorKind::kIo, "cannot create " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  require(f.good(), ErrorKind::kIo, "write failed: " + path);
}

}  // namespace dofsplat::io
