/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/coco.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "boxmend/error.hpp"

namespace boxmend {

using nlohmann::json;

const ImageRecord* Dataset::find_image(std::int64_t id) const {
  const auto it = std::find_if(images.begin(), images.end(), [id](const auto& im) { return im.id == id; });
  return it == images.end() ? nullptr : &*it;
}

const Category* Dataset::find_category(std::int64_t id) const {
  const auto it = std::find_if(categories.begin(), categories.end(), [id](const auto& c) { return c.id == id; });
  return it == categories.end() ? nullptr : &*it;
}

const Annotation* Dataset::find_annotation(std::int64_t id) const {
  const auto it = std::find_if(annotations.begin(), annotations.end(), [id](const auto& a) { return a.id == id; });
  return it == annotations.end() ? nullptr : &*it;
}

std::vector<const Annotation*> Dataset::annotations_of(std::int64_t image_id) const {
  std::vector<const Annotation*> out;
  for (const auto& a : annotations) {
    if (a.image_id == image_id) out.push_back(&a);
  }
  return out;
}

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(ErrorCode::kSchemaError, where + ": missing key \"" + key + "\"");
  }
  return obj.at(key);
}

std::int64_t require_int(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) fail(ErrorCode::kSchemaError, where + ": \"" + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

double require_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(ErrorCode::kSchemaError, where + ": expected a number");
  return v.get<double>();
}

const json& require_array(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_array()) fail(ErrorCode::kSchemaError, where + ": \"" + key + "\" must be an array");
  return v;
}

}  // namespace

Dataset parse_coco(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, e.what());
  }
  if (!root.is_object()) fail(ErrorCode::kSchemaError, "top level must be an object");

  Dataset d;
  std::unordered_map<std::int64_t, ImageDims> image_dims;
  for (const auto& im : require_array(root, "images", "root")) {
    const std::string where = "image";
    ImageRecord rec;
    rec.id = require_int(im, "id", where);
    const json& name = require(im, "file_name", where + " " + std::to_string(rec.id));
    if (!name.is_string()) fail(ErrorCode::kSchemaError, "image " + std::to_string(rec.id) + ": file_name must be a string");
    rec.file_path = name.get<std::string>();
    rec.dims.width = static_cast<int>(require_int(im, "width", where));
    rec.dims.height = static_cast<int>(require_int(im, "height", where));
    if (rec.dims.width < 1 || rec.dims.height < 1) {
      fail(ErrorCode::kSchemaError, "image " + std::to_string(rec.id) + ": dimensions must be positive");
    }
    if (!image_dims.emplace(rec.id, rec.dims).second) {
      fail(ErrorCode::kSchemaError, "duplicate image id " + std::to_string(rec.id));
    }
    d.images.push_back(std::move(rec));
  }

  std::unordered_set<std::int64_t> category_ids;
  for (const auto& c : require_array(root, "categories", "root")) {
    Category cat;
    cat.id = require_int(c, "id", "category");
    const json& name = require(c, "name", "category " + std::to_string(cat.id));
    if (!name.is_string() || name.get<std::string>().empty()) {
      fail(ErrorCode::kSchemaError, "category " + std::to_string(cat.id) + ": name must be a non-empty string");
    }
    cat.name = name.get<std::string>();
    if (!category_ids.insert(cat.id).second) {
      fail(ErrorCode::kSchemaError, "duplicate category id " + std::to_string(cat.id));
    }
    d.categories.push_back(std::move(cat));
  }

  std::unordered_set<std::int64_t> annotation_ids;
  for (const auto& a : require_array(root, "annotations", "root")) {
    Annotation ann;
    ann.id = require_int(a, "id", "annotation");
    const std::string where = "annotation " + std::to_string(ann.id);
    ann.image_id = require_int(a, "image_id", where);
    ann.category_id = require_int(a, "category_id", where);
    if (!annotation_ids.insert(ann.id).second) fail(ErrorCode::kSchemaError, "duplicate annotation id " + std::to_string(ann.id));

    const json& bbox = require_array(a, "bbox", where);
    if (bbox.size() != 4) fail(ErrorCode::kSchemaError, where + ": bbox must have 4 numbers");
    ann.box = Box::from_top_left(require_number(bbox[0], where), require_number(bbox[1], where),
                                 require_number(bbox[2], where), require_number(bbox[3], where));
    if (!ann.box.valid()) fail(ErrorCode::kInvalidBox, where + ": bbox width and height must be positive");

    const auto dims = image_dims.find(ann.image_id);
    if (dims == image_dims.end()) {
      fail(ErrorCode::kDanglingReference, where + " references missing image " + std::to_string(ann.image_id));
    }
    if (!category_ids.contains(ann.category_id)) {
      fail(ErrorCode::kDanglingReference, where + " references missing category " + std::to_string(ann.category_id));
    }

    // Polygon segmentations are not supported and are skipped.
    if (a.contains("segmentation") && a.at("segmentation").is_object()) {
      const Rle rle = rle_from_json(a.at("segmentation"));
      if (rle.width != dims->second.width || rle.height != dims->second.height) {
        fail(ErrorCode::kSchemaError, where + ": segmentation size differs from image size");
      }
      ann.mask = rle_decode(rle);
    }
    d.annotations.push_back(std::move(ann));
  }

  if (root.contains("info") && root.at("info").is_object() && root.at("info").contains("boxmend")) {
    d.provenance = root.at("info").at("boxmend");
    if (!d.provenance.is_object()) fail(ErrorCode::kSchemaError, "info.boxmend must be an object");
  }
  return d;
}

Dataset load_coco(const std::filesystem::path& path) { return parse_coco(read_text_file(path)); }

std::string dump_coco(const Dataset& d) {
  auto by_id = [](const auto* a, const auto* b) { return a->id < b->id; };

  std::vector<const ImageRecord*> images;
  for (const auto& im : d.images) images.push_back(&im);
  std::stable_sort(images.begin(), images.end(), by_id);
  std::vector<const Category*> cats;
  for (const auto& c : d.categories) cats.push_back(&c);
  std::stable_sort(cats.begin(), cats.end(), by_id);
  std::vector<const Annotation*> anns;
  for (const auto& a : d.annotations) anns.push_back(&a);
  std::stable_sort(anns.begin(), anns.end(), by_id);

  json root = json::object();
  json& jimages = root["images"] = json::array();
  for (const auto* im : images) {
    jimages.push_back({{"id", im->id}, {"file_name", im->file_path}, {"width", im->dims.width}, {"height", im->dims.height}});
  }
  json& jcats = root["categories"] = json::array();
  for (const auto* c : cats) jcats.push_back({{"id", c->id}, {"name", c->name}});
  json& janns = root["annotations"] = json::array();
  for (const auto* a : anns) {
    const auto tl = a->box.top_left();
    json ja = {{"id", a->id},
               {"image_id", a->image_id},
               {"category_id", a->category_id},
               {"bbox", {tl[0], tl[1], tl[2], tl[3]}},
               {"area", a->box.area()},
               {"iscrowd", 0}};
    if (a->mask) ja["segmentation"] = json(rle_to_json(rle_encode(*a->mask)));
    janns.push_back(std::move(ja));
  }
  if (!d.provenance.is_null() && !d.provenance.empty()) root["info"] = {{"boxmend", d.provenance}};
  return root.dump() + "\n";
}

void save_coco(const Dataset& d, const std::filesystem::path& path) { write_text_file(path, dump_coco(d)); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kIoError, "read failed: " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::kIoError, "write failed: " + path.string());
}

}  // namespace boxmend
