/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "boxmend/dataset.hpp"

namespace boxmend {

/// Parses COCO JSON. Boxes are converted from top-left to center form and RLE
/// segmentations are decoded. Throws ParseError, SchemaError,
/// DanglingReference or InvalidBox (naming the annotation id).
Dataset parse_coco(std::string_view text);
Dataset load_coco(const std::filesystem::path& path);

/// Deterministic serialization: sorted keys, images/categories/annotations
/// ordered by id, provenance under info.boxmend.
std::string dump_coco(const Dataset& d);
void save_coco(const Dataset& d, const std::filesystem::path& path);

enum class Severity { kWarning, kError };

struct Issue {
  Severity severity = Severity::kError;
  std::string code;
  std::string message;
  std::optional<std::int64_t> annotation_id;
};

struct ValidationReport {
  std::vector<Issue> issues;

  bool empty() const { return issues.empty(); }
  std::size_t error_count() const;
  std::size_t warning_count() const;
  nlohmann::ordered_json to_json() const;
};

/// Never throws; collects dangling references, duplicate ids, invalid and
/// out-of-frame boxes (warning), and mask/image size mismatches.
ValidationReport validate(const Dataset& d);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace boxmend
