/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace boxmend::cli {

/// Lowercase hex SHA-256 of a file's bytes. Throws IoError.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

/// Reproducibility record written next to every run's outputs.
struct RunManifest {
  std::string tool_version;
  std::string subcommand;
  nlohmann::ordered_json flags = nlohmann::ordered_json::object();
  nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  /// Digests are taken when this is called; directories are skipped.
  nlohmann::ordered_json to_json() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace boxmend::cli
