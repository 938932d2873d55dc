/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/image.hpp"

#include <png.h>

#include <cstdlib>
#include <memory>

#include "boxmend/coco.hpp"
#include "boxmend/error.hpp"

namespace boxmend {

RgbImage::RgbImage(ImageDims d, Rgb fill)
    : dims(d), pixels(static_cast<std::size_t>(d.width) * static_cast<std::size_t>(d.height) * 3) {
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

Rgb RgbImage::at(int row, int col) const {
  const std::size_t i = (static_cast<std::size_t>(row) * static_cast<std::size_t>(dims.width) + static_cast<std::size_t>(col)) * 3;
  return Rgb{pixels[i], pixels[i + 1], pixels[i + 2]};
}

void RgbImage::set(int row, int col, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(row) * static_cast<std::size_t>(dims.width) + static_cast<std::size_t>(col)) * 3;
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.dims.width);
  png.height = static_cast<png_uint_32>(image.dims.height);
  png.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    fail(ErrorCode::kIoError, std::string("PNG size query failed: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    fail(ErrorCode::kIoError, std::string("PNG encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = std::uint32_t{bytes[i]} << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string inline_image_ref(const RgbImage& image) {
  return std::string(kInlinePngPrefix) + base64_encode(encode_png(image));
}

}  // namespace boxmend
