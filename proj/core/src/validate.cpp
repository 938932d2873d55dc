/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "boxmend/coco.hpp"

namespace boxmend {

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(issues.begin(), issues.end(), [](const Issue& i) { return i.severity == Severity::kError; }));
}

std::size_t ValidationReport::warning_count() const { return issues.size() - error_count(); }

nlohmann::ordered_json ValidationReport::to_json() const {
  nlohmann::ordered_json j;
  j["errors"] = error_count();
  j["warnings"] = warning_count();
  j["issues"] = nlohmann::ordered_json::array();
  for (const auto& i : issues) {
    nlohmann::ordered_json ji;
    ji["severity"] = i.severity == Severity::kError ? "error" : "warning";
    ji["code"] = i.code;
    ji["message"] = i.message;
    if (i.annotation_id) ji["annotation_id"] = *i.annotation_id;
    j["issues"].push_back(std::move(ji));
  }
  return j;
}

ValidationReport validate(const Dataset& d) {
  ValidationReport report;
  auto add = [&report](Severity s, std::string code, std::string msg, std::optional<std::int64_t> ann = {}) {
    report.issues.push_back(Issue{s, std::move(code), std::move(msg), ann});
  };

  std::unordered_map<std::int64_t, ImageDims> images;
  for (const auto& im : d.images) {
    if (!images.emplace(im.id, im.dims).second) {
      add(Severity::kError, "duplicate-image-id", "duplicate image id " + std::to_string(im.id));
    }
    if (im.dims.width < 1 || im.dims.height < 1) {
      add(Severity::kError, "invalid-image-dims", "image " + std::to_string(im.id) + " has non-positive dimensions");
    }
  }
  std::unordered_set<std::int64_t> categories;
  for (const auto& c : d.categories) {
    if (!categories.insert(c.id).second) {
      add(Severity::kError, "duplicate-category-id", "duplicate category id " + std::to_string(c.id));
    }
    if (c.name.empty()) add(Severity::kError, "empty-category-name", "category " + std::to_string(c.id) + " has no name");
  }
  std::unordered_set<std::int64_t> seen;
  for (const auto& a : d.annotations) {
    const std::string where = "annotation " + std::to_string(a.id);
    if (!seen.insert(a.id).second) add(Severity::kError, "duplicate-annotation-id", "duplicate " + where, a.id);
    if (!categories.contains(a.category_id)) {
      add(Severity::kError, "dangling-category", where + " references missing category " + std::to_string(a.category_id), a.id);
    }
    if (!a.box.valid()) {
      add(Severity::kError, "invalid-box", where + " has a non-positive or non-finite box", a.id);
    }
    const auto im = images.find(a.image_id);
    if (im == images.end()) {
      add(Severity::kError, "dangling-image", where + " references missing image " + std::to_string(a.image_id), a.id);
      continue;
    }
    if (a.box.valid() && !inside_frame(a.box, im->second)) {
      add(Severity::kWarning, "out-of-frame", where + " extends past the image edge", a.id);
    }
    if (a.mask && a.mask->dims() != im->second) {
      add(Severity::kError, "mask-size-mismatch", where + " mask size differs from image size", a.id);
    }
  }
  return report;
}

}  // namespace boxmend
