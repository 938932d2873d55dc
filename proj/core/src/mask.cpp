/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/mask.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "boxmend/error.hpp"

namespace boxmend {

Mask::Mask(int width, int height)
    : width_(width),
      height_(height),
      data_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)), 0) {
  if (width < 0 || height < 0) fail(ErrorCode::kInvalidArgument, "negative mask dimensions");
}

Mask::Mask(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) fail(ErrorCode::kInvalidArgument, "negative mask dimensions");
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    fail(ErrorCode::kInvalidArgument, "mask data length does not match width*height");
  }
  for (auto& v : data_) v = v ? 1 : 0;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

Box mask_to_box(const Mask& m) {
  int min_row = m.height(), max_row = -1, min_col = m.width(), max_col = -1;
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      if (!m.at(r, c)) continue;
      min_row = std::min(min_row, r);
      max_row = std::max(max_row, r);
      min_col = std::min(min_col, c);
      max_col = std::max(max_col, c);
    }
  }
  if (max_row < 0) fail(ErrorCode::kEmptyMask, "mask has no set pixels");
  return Box::from_corners(min_col, min_row, max_col + 1, max_row + 1);
}

Rle rle_encode(const Mask& m) {
  Rle rle{m.height(), m.width(), {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int c = 0; c < m.width(); ++c) {
    for (int r = 0; r < m.height(); ++r) {
      const std::uint8_t v = m.at(r, c) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

Mask rle_decode(const Rle& rle, ImageDims dims) {
  const std::uint64_t total = static_cast<std::uint64_t>(dims.width) * static_cast<std::uint64_t>(dims.height);
  const std::uint64_t sum = std::accumulate(rle.counts.begin(), rle.counts.end(), std::uint64_t{0});
  if (sum != total) {
    fail(ErrorCode::kRleLengthMismatch,
         "counts sum to " + std::to_string(sum) + ", expected " + std::to_string(total));
  }
  Mask m(dims.width, dims.height);
  std::uint64_t pos = 0;
  bool on = false;
  for (const auto run : rle.counts) {
    if (on) {
      for (std::uint64_t p = pos; p < pos + run; ++p) {
        const int col = static_cast<int>(p / static_cast<std::uint64_t>(dims.height));
        const int row = static_cast<int>(p % static_cast<std::uint64_t>(dims.height));
        m.set(row, col);
      }
    }
    pos += run;
    on = !on;
  }
  return m;
}

Mask rle_decode(const Rle& rle) { return rle_decode(rle, ImageDims{rle.width, rle.height}); }

nlohmann::ordered_json rle_to_json(const Rle& rle) {
  nlohmann::ordered_json j;
  j["size"] = {rle.height, rle.width};
  j["counts"] = rle.counts;
  return j;
}

Rle rle_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("size") || !j.contains("counts")) {
    fail(ErrorCode::kSchemaError, "RLE must be an object with \"size\" and \"counts\"");
  }
  const auto& size = j.at("size");
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() || !size[1].is_number_integer()) {
    fail(ErrorCode::kSchemaError, "RLE \"size\" must be [height, width]");
  }
  const int height = size[0].get<int>();
  const int width = size[1].get<int>();
  if (height < 0 || width < 0) fail(ErrorCode::kSchemaError, "RLE size must be non-negative");
  const auto& counts = j.at("counts");
  if (counts.is_string()) return rle_from_compressed_string(counts.get<std::string>(), height, width);
  if (!counts.is_array()) fail(ErrorCode::kSchemaError, "RLE \"counts\" must be an array or string");
  Rle rle{height, width, {}};
  rle.counts.reserve(counts.size());
  for (const auto& c : counts) {
    if (!c.is_number_integer() || c.get<std::int64_t>() < 0 ||
        c.get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max()) {
      fail(ErrorCode::kSchemaError, "RLE counts must be non-negative integers");
    }
    rle.counts.push_back(c.get<std::uint32_t>());
  }
  return rle;
}

// Mirrors pycocotools' rleFrString: 5-bit groups, continuation bit 0x20, offset 48,
// counts after the second are delta-coded against counts[i - 2].
Rle rle_from_compressed_string(std::string_view s, int height, int width) {
  Rle rle{height, width, {}};
  std::size_t p = 0;
  while (p < s.size()) {
    std::int64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= s.size()) fail(ErrorCode::kSchemaError, "truncated compressed RLE string");
      const std::int64_t c = static_cast<std::int64_t>(s[p]) - 48;
      x |= (c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= -(std::int64_t{1} << (5 * k));
    }
    if (rle.counts.size() > 2) x += rle.counts[rle.counts.size() - 2];
    if (x < 0) fail(ErrorCode::kSchemaError, "negative run in compressed RLE string");
    rle.counts.push_back(static_cast<std::uint32_t>(x));
  }
  return rle;
}

std::size_t intersection_count(const Mask& a, const Mask& b) {
  if (a.dims() != b.dims()) fail(ErrorCode::kInvalidArgument, "mask dimensions differ");
  std::size_t n = 0;
  const auto& da = a.data();
  const auto& db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) n += static_cast<std::size_t>(da[i] & db[i]);
  return n;
}

double mask_iou(const Mask& a, const Mask& b) {
  const std::size_t inter = intersection_count(a, b);
  const std::size_t uni = a.count() + b.count() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace boxmend
