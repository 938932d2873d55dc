/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "boxmend/geometry.hpp"
#include "boxmend/mask.hpp"

namespace boxmend {

struct Category {
  std::int64_t id = 0;
  std::string name;

  friend bool operator==(const Category&, const Category&) = default;
};

struct ImageRecord {
  std::int64_t id = 0;
  std::string file_path;
  ImageDims dims;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct Annotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  Box box;
  std::optional<Mask> mask;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// Images, taxonomy and annotations. `provenance` is a JSON object persisted
/// under info.boxmend (seed, noise_level, stage, plus stage-specific keys).
struct Dataset {
  std::vector<ImageRecord> images;
  std::vector<Category> categories;
  std::vector<Annotation> annotations;
  nlohmann::json provenance = nlohmann::json::object();

  const ImageRecord* find_image(std::int64_t id) const;
  const Category* find_category(std::int64_t id) const;
  const Annotation* find_annotation(std::int64_t id) const;

  /// Annotations of one image, in dataset order.
  std::vector<const Annotation*> annotations_of(std::int64_t image_id) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace boxmend
