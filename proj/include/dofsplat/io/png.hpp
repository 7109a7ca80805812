// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "dofsplat/error.hpp"

namespace dofsplat::io {

/// Decoded PNG samples before normalization. Palette, sub-byte gray and
/// alpha are expanded/stripped so `channels` is 1 or 3.
struct PngRaster {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;  // 8 or 16
  std::vector<std::uint16_t> samples;
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
  return FilePtr(std::fopen(path.c_str(), mode));
}

inline void png_error_fn(png_structp png, png_const_charp msg) {
  auto* out = static_cast<std::string*>(png_get_error_ptr(png));
  if (out) *out = msg ? msg : "libpng error";
  std::longjmp(png_jmpbuf(png), 1);
}

inline void png_warning_fn(png_structp, png_const_charp) {}

}  // namespace detail

inline PngRaster read_png(const std::string& path) {
  detail::FilePtr file = detail::open_file(path, "rb");
  require(file != nullptr, ErrorKind::kIo, "cannot open " + path);

  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    fail(ErrorKind::kFormat, path + ": not a PNG file");
  }

  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message,
                                           detail::png_error_fn, detail::png_warning_fn);
  require(png != nullptr, ErrorKind::kIo, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(ErrorKind::kIo, "png_create_info_struct failed");
  }

  PngRaster raster;
  std::vector<png_bytep> rows;
  std::vector<png_byte> bytes;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::kFormat, path + ": malformed PNG (" + message + ")");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  raster.width = static_cast<int>(png_get_image_width(png, info));
  raster.height = static_cast<int>(png_get_image_height(png, info));
  raster.channels = png_get_channels(png, info);
  raster.bit_depth = png_get_bit_depth(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  bytes.resize(rowbytes * raster.height);
  rows.resize(raster.height);
  for (int y = 0; y < raster.height; ++y) rows[y] = bytes.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (raster.channels != 1 && raster.channels != 3) {
    fail(ErrorKind::kFormat, path + ": unsupported channel layout");
  }
  if (raster.bit_depth != 8 && raster.bit_depth != 16) {
    fail(ErrorKind::kFormat, path + ": unsupported bit depth " + std::to_string(raster.bit_depth));
  }
  const std::size_t n = static_cast<std::size_t>(raster.width) * raster.height * raster.channels;
  raster.samples.resize(n);
  if (raster.bit_depth == 8) {
    for (std::size_t i = 0; i < n; ++i) raster.samples[i] = bytes[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint16_t v;
      std::memcpy(&v, bytes.data() + 2 * i, 2);
      raster.samples[i] = v;
    }
  }
  return raster;
}

/// Writes 8- or 16-bit gray/RGB PNG. No time or text chunks are emitted, so
/// identical rasters produce identical files.
inline void write_png(const std::string& path, const PngRaster& raster) {
  require(raster.channels == 1 || raster.channels == 3, ErrorKind::kInvalidArgument,
          "PNG output needs 1 or 3 channels");
  require(raster.bit_depth == 8 || raster.bit_depth == 16, ErrorKind::kInvalidArgument,
          "PNG output needs bit depth 8 or 16");
  detail::FilePtr file = detail::open_file(path, "wb");
  require(file != nullptr, ErrorKind::kIo, "cannot create " + path);

  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message,
                                            detail::png_error_fn, detail::png_warning_fn);
  require(png != nullptr, ErrorKind::kIo, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(ErrorKind::kIo, "png_create_info_struct failed");
  }

  const int bytes_per_sample = raster.bit_depth / 8;
  const std::size_t rowbytes =
      static_cast<std::size_t>(raster.width) * raster.channels * bytes_per_sample;
  std::vector<png_byte> bytes(rowbytes * raster.height);
  for (std::size_t i = 0; i < raster.samples.size(); ++i) {
    const std::uint16_t v = raster.samples[i];
    if (bytes_per_sample == 1) {
      bytes[i] = static_cast<png_byte>(v);
    } else {
      bytes[2 * i] = static_cast<png_byte>(v >> 8);  // PNG is big-endian
      bytes[2 * i + 1] = static_cast<png_byte>(v & 0xff);
    }
  }
  std::vector<png_bytep> rows(raster.height);
  for (int y = 0; y < raster.height; ++y) rows[y] = bytes.data() + rowbytes * y;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::kIo, path + ": PNG write failed (" + message + ")");
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, raster.width, raster.height, raster.bit_depth,
               raster.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace dofsplat::io
