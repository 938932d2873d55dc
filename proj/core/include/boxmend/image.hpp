/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "boxmend/geometry.hpp"

namespace boxmend {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Interleaved 8-bit RGB raster, row-major.
struct RgbImage {
  ImageDims dims;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(ImageDims d, Rgb fill);

  Rgb at(int row, int col) const;
  void set(int row, int col, Rgb c);

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

std::vector<std::uint8_t> encode_png(const RgbImage& image);
void write_png(const RgbImage& image, const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);

/// Prefix marking an inline image_ref: "data:image/png;base64,".
inline constexpr std::string_view kInlinePngPrefix = "data:image/png;base64,";

/// image_ref carrying the PNG bytes inline.
std::string inline_image_ref(const RgbImage& image);

}  // namespace boxmend
