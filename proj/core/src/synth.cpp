/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "boxmend/error.hpp"
#include "boxmend/pcg32.hpp"

namespace boxmend {

namespace {

constexpr int kMaxPlacementAttempts = 200;
constexpr Rgb kBackground{32, 32, 32};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Distinct for the first 196 instances: the red channel alone is a bijection.
Rgb instance_color(int k) {
  return Rgb{static_cast<std::uint8_t>(60 + (k * 97) % 196), static_cast<std::uint8_t>(60 + (k * 57 + 31) % 196),
             static_cast<std::uint8_t>(60 + (k * 131 + 77) % 196)};
}

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Rasterizes one shape by pixel-center sampling.
Mask rasterize(ShapeKind kind, ImageDims dims, Pcg32& rng, int min_size, int max_size) {
  const auto size = [&] { return min_size + static_cast<int>(rng.below(static_cast<std::uint32_t>(max_size - min_size + 1))); };
  Mask m(dims.width, dims.height);
  switch (kind) {
    case ShapeKind::kCircle: {
      const double r = size() / 2.0;
      const double cx = rng.uniform(r, dims.width - r);
      const double cy = rng.uniform(r, dims.height - r);
      const int c0 = std::max(0, static_cast<int>(std::floor(cx - r)));
      const int c1 = std::min(dims.width - 1, static_cast<int>(std::ceil(cx + r)));
      const int r0 = std::max(0, static_cast<int>(std::floor(cy - r)));
      const int r1 = std::min(dims.height - 1, static_cast<int>(std::ceil(cy + r)));
      for (int row = r0; row <= r1; ++row) {
        for (int col = c0; col <= c1; ++col) {
          const double dx = col + 0.5 - cx, dy = row + 0.5 - cy;
          if (dx * dx + dy * dy <= r * r) m.set(row, col);
        }
      }
      break;
    }
    case ShapeKind::kRectangle: {
      const int w = size();
      const int h = size();
      const int x = static_cast<int>(rng.below(static_cast<std::uint32_t>(dims.width - w + 1)));
      const int y = static_cast<int>(rng.below(static_cast<std::uint32_t>(dims.height - h + 1)));
      for (int row = y; row < y + h; ++row) {
        for (int col = x; col < x + w; ++col) m.set(row, col);
      }
      break;
    }
    case ShapeKind::kTriangle: {
      const int w = size();
      const int h = size();
      const double x = rng.uniform(0.0, dims.width - w);
      const double y = rng.uniform(0.0, dims.height - h);
      const double ax = x + w / 2.0, ay = y;  // apex
      const double bx = x, by = y + h;
      const double cx = x + w, cy = y + h;
      for (int row = std::max(0, static_cast<int>(y)); row < std::min(dims.height, static_cast<int>(std::ceil(y + h)) + 1); ++row) {
        for (int col = std::max(0, static_cast<int>(x)); col < std::min(dims.width, static_cast<int>(std::ceil(x + w)) + 1); ++col) {
          const double px = col + 0.5, py = row + 0.5;
          const double e0 = edge(ax, ay, bx, by, px, py);
          const double e1 = edge(bx, by, cx, cy, px, py);
          const double e2 = edge(cx, cy, ax, ay, px, py);
          const bool inside = (e0 <= 0 && e1 <= 0 && e2 <= 0) || (e0 >= 0 && e1 >= 0 && e2 >= 0);
          if (inside) m.set(row, col);
        }
      }
      break;
    }
  }
  return m;
}

}  // namespace

ShapeKind shape_for_class(const std::string& name, std::size_t index) {
  const std::string n = lower(name);
  if (n == "circle" || n == "disk" || n == "disc") return ShapeKind::kCircle;
  if (n == "rectangle" || n == "square" || n == "rect" || n == "box") return ShapeKind::kRectangle;
  if (n == "triangle") return ShapeKind::kTriangle;
  return static_cast<ShapeKind>(index % 3);
}

void check_spec(const SceneSpec& spec) {
  if (spec.dims.width < 1 || spec.dims.height < 1) fail(ErrorCode::kInvalidArgument, "scene dimensions must be positive");
  if (spec.num_objects < 1) fail(ErrorCode::kInvalidArgument, "num_objects must be >= 1");
  if (spec.shape_classes.empty()) fail(ErrorCode::kInvalidArgument, "at least one shape class is required");
  if (spec.min_size < 1 || spec.min_size > spec.max_size || spec.max_size > std::min(spec.dims.width, spec.dims.height)) {
    fail(ErrorCode::kInvalidArgument, "require 1 <= min_size <= max_size <= min(width, height)");
  }
}

SceneSpec spec_from_json(const nlohmann::json& j) {
  SceneSpec spec;
  try {
    spec.dims.width = j.value("width", spec.dims.width);
    spec.dims.height = j.value("height", spec.dims.height);
    spec.num_objects = j.value("num_objects", spec.num_objects);
    spec.min_size = j.value("min_size", spec.min_size);
    spec.max_size = j.value("max_size", spec.max_size);
    spec.allow_overlap = j.value("allow_overlap", spec.allow_overlap);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("classes")) {
      spec.shape_classes.clear();
      std::int64_t next_id = 1;
      for (const auto& c : j.at("classes")) {
        if (c.is_string()) {
          spec.shape_classes.push_back(Category{next_id++, c.get<std::string>()});
        } else {
          spec.shape_classes.push_back(Category{c.at("id").get<std::int64_t>(), c.at("name").get<std::string>()});
          next_id = spec.shape_classes.back().id + 1;
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kSchemaError, std::string("scene spec: ") + e.what());
  }
  check_spec(spec);
  return spec;
}

nlohmann::ordered_json spec_to_json(const SceneSpec& spec) {
  nlohmann::ordered_json j;
  j["width"] = spec.dims.width;
  j["height"] = spec.dims.height;
  j["num_objects"] = spec.num_objects;
  j["classes"] = nlohmann::ordered_json::array();
  for (const auto& c : spec.shape_classes) j["classes"].push_back({{"id", c.id}, {"name", c.name}});
  j["min_size"] = spec.min_size;
  j["max_size"] = spec.max_size;
  j["allow_overlap"] = spec.allow_overlap;
  j["seed"] = spec.seed;
  return j;
}

Scene generate_scene(const SceneSpec& spec, std::int64_t image_id, std::int64_t first_annotation_id) {
  check_spec(spec);
  Pcg32 rng(spec.seed, 0x5ce9e);
  const ImageDims dims = spec.dims;
  const std::size_t npix = static_cast<std::size_t>(dims.width) * static_cast<std::size_t>(dims.height);

  Scene scene;
  scene.record = ImageRecord{image_id, "", dims};
  scene.categories = spec.shape_classes;
  scene.instance_map.assign(npix, 0);

  std::vector<std::int64_t> classes;
  for (int k = 1; k <= spec.num_objects; ++k) {
    const auto cls = rng.below(static_cast<std::uint32_t>(spec.shape_classes.size()));
    const ShapeKind kind = shape_for_class(spec.shape_classes[cls].name, cls);
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const Mask m = rasterize(kind, dims, rng, spec.min_size, spec.max_size);
      const auto& data = m.data();
      bool clash = m.empty();
      if (!spec.allow_overlap) {
        for (std::size_t i = 0; i < npix && !clash; ++i) clash = data[i] && scene.instance_map[i] != 0;
      }
      if (clash) continue;
      const auto id = static_cast<std::int32_t>(classes.size() + 1);
      for (std::size_t i = 0; i < npix; ++i) {
        if (data[i]) scene.instance_map[i] = id;
      }
      classes.push_back(spec.shape_classes[cls].id);
      placed = true;
    }
    if (!placed) {
      fail(ErrorCode::kPlacementFailure, "could not place object " + std::to_string(k) + " of " +
                                             std::to_string(spec.num_objects) + " without overlap");
    }
  }

  // Masks come from the final instance map so occluded parts are excluded.
  std::vector<Mask> masks(classes.size(), Mask(dims.width, dims.height));
  for (int row = 0; row < dims.height; ++row) {
    for (int col = 0; col < dims.width; ++col) {
      const auto id = scene.instance_at(row, col);
      if (id > 0) masks[static_cast<std::size_t>(id - 1)].set(row, col);
    }
  }
  // Fully occluded instances are dropped and the map is renumbered.
  std::vector<std::int32_t> remap(classes.size() + 1, 0);
  std::int64_t ann_id = first_annotation_id;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    if (masks[k].empty()) continue;
    remap[k + 1] = static_cast<std::int32_t>(scene.annotations.size() + 1);
    Annotation a;
    a.id = ann_id++;
    a.image_id = image_id;
    a.category_id = classes[k];
    a.box = mask_to_box(masks[k]);
    a.mask = std::move(masks[k]);
    scene.annotations.push_back(std::move(a));
  }
  for (auto& v : scene.instance_map) v = remap[static_cast<std::size_t>(v)];

  scene.image = RgbImage(dims, kBackground);
  for (int row = 0; row < dims.height; ++row) {
    for (int col = 0; col < dims.width; ++col) {
      const auto id = scene.instance_at(row, col);
      if (id > 0) scene.image.set(row, col, instance_color(id));
    }
  }
  return scene;
}

std::vector<Scene> generate_scenes(const SceneSpec& spec, int count) {
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(std::max(count, 0)));
  std::int64_t next_ann = 1;
  for (int i = 0; i < count; ++i) {
    SceneSpec s = spec;
    s.seed = mix64(spec.seed, static_cast<std::uint64_t>(i));
    Scene scene = generate_scene(s, i + 1, next_ann);
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.png", i + 1);
    scene.record.file_path = name;
    next_ann += static_cast<std::int64_t>(scene.annotations.size());
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

Dataset scenes_to_dataset(const std::vector<Scene>& scenes) {
  Dataset d;
  for (const auto& s : scenes) {
    d.images.push_back(s.record);
    for (const auto& c : s.categories) {
      if (d.find_category(c.id) == nullptr) d.categories.push_back(c);
    }
    d.annotations.insert(d.annotations.end(), s.annotations.begin(), s.annotations.end());
  }
  d.provenance["stage"] = "synthetic";
  return d;
}

}  // namespace boxmend
