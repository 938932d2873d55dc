/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>

#include <nlohmann/json.hpp>

#include "boxmend/coco.hpp"
#include "boxmend/error.hpp"
#include "cli.hpp"

namespace boxmend::cli {

namespace {

std::string scalar_token(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return "--" + key + "=" + v.get<std::string>();
  if (v.is_boolean()) return "--" + key + "=" + (v.get<bool>() ? "true" : "false");
  if (v.is_number()) return "--" + key + "=" + v.dump();
  fail(ErrorCode::kSchemaError, "config key \"" + key + "\" must hold a string, number, boolean or array");
}

std::vector<std::string> config_tokens(const std::string& path) {
  const auto text = read_text_file(path);
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::kParseError, "config " + path + " is not valid JSON");
  if (!j.is_object()) fail(ErrorCode::kSchemaError, "config " + path + " must be a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : j.items()) {
    if (value.is_null()) continue;
    if (value.is_array()) {
      for (const auto& v : value) tokens.push_back(scalar_token(key, v));
    } else {
      tokens.push_back(scalar_token(key, value));
    }
  }
  return tokens;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::vector<std::string> injected;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) fail(ErrorCode::kInvalidArgument, "--config needs a file argument");
      const auto t = config_tokens(args[++i]);
      injected.insert(injected.end(), t.begin(), t.end());
    } else if (a.rfind("--config=", 0) == 0) {
      const auto t = config_tokens(a.substr(9));
      injected.insert(injected.end(), t.begin(), t.end());
    } else {
      rest.push_back(a);
    }
  }
  if (injected.empty()) return rest;
  auto sub = std::find_if(rest.begin(), rest.end(), [](const std::string& s) { return !s.starts_with("-"); });
  const auto at = sub == rest.end() ? rest.begin() : std::next(sub);
  rest.insert(at, injected.begin(), injected.end());
  return rest;
}

}  // namespace boxmend::cli
