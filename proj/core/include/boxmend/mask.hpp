/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "boxmend/geometry.hpp"

namespace boxmend {

/// Binary raster, row-major, one byte per pixel (0 or 1).
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height);
  Mask(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  ImageDims dims() const { return {width_, height_}; }

  bool at(int row, int col) const { return data_[index(row, col)] != 0; }
  void set(int row, int col, bool on = true) { data_[index(row, col)] = on ? 1 : 0; }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// COCO uncompressed RLE: column-major runs, first run counts zeros.
struct Rle {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  friend bool operator==(const Rle&, const Rle&) = default;
};

/// Tightest box covering every set pixel. Throws EmptyMask on an all-zero mask.
Box mask_to_box(const Mask& m);

Rle rle_encode(const Mask& m);
/// Throws RleLengthMismatch when counts do not sum to width * height.
Mask rle_decode(const Rle& rle, ImageDims dims);
Mask rle_decode(const Rle& rle);

/// {"size":[height,width],"counts":[...]}
nlohmann::ordered_json rle_to_json(const Rle& rle);
/// Accepts integer-array counts or COCO's compressed string counts.
Rle rle_from_json(const nlohmann::json& j);
Rle rle_from_compressed_string(std::string_view counts, int height, int width);

double mask_iou(const Mask& a, const Mask& b);
std::size_t intersection_count(const Mask& a, const Mask& b);

}  // namespace boxmend
