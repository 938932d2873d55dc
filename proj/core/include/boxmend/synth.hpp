/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "boxmend/dataset.hpp"
#include "boxmend/image.hpp"

namespace boxmend {

enum class ShapeKind { kCircle, kRectangle, kTriangle };

/// Shape drawn for a class: by name ("circle", "rectangle"/"square",
/// "triangle"), otherwise by position in the class list.
ShapeKind shape_for_class(const std::string& name, std::size_t index);

struct SceneSpec {
  ImageDims dims{128, 128};
  int num_objects = 3;
  std::vector<Category> shape_classes{{1, "circle"}, {2, "rectangle"}, {3, "triangle"}};
  int min_size = 16;
  int max_size = 48;
  bool allow_overlap = false;
  std::uint64_t seed = 0;
};

/// Throws InvalidArgument when the spec breaks its invariants.
void check_spec(const SceneSpec& spec);

SceneSpec spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json spec_to_json(const SceneSpec& spec);

/// One rendered image with exact instance annotations. Annotation masks are
/// the visible pixels of each instance in `instance_map` (0 = background,
/// k = annotations[k-1]).
struct Scene {
  RgbImage image;
  ImageRecord record;
  std::vector<Category> categories;
  std::vector<Annotation> annotations;
  std::vector<std::int32_t> instance_map;

  std::int32_t instance_at(int row, int col) const {
    return instance_map[static_cast<std::size_t>(row) * static_cast<std::size_t>(record.dims.width) +
                        static_cast<std::size_t>(col)];
  }
};

/// Deterministic in spec.seed. Throws PlacementFailure when allow_overlap is
/// false and an object cannot be placed after bounded retries.
Scene generate_scene(const SceneSpec& spec, std::int64_t image_id = 1, std::int64_t first_annotation_id = 1);

/// `count` scenes; scene i uses seed mix64(spec.seed, i), image id i+1,
/// file name "%06d.png", and globally unique annotation ids.
std::vector<Scene> generate_scenes(const SceneSpec& spec, int count);

/// Merges scenes into one dataset (masks included).
Dataset scenes_to_dataset(const std::vector<Scene>& scenes);

}  // namespace boxmend
