/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/provider.hpp"

#include <filesystem>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "boxmend/error.hpp"

namespace boxmend {

SegmentResponse call_provider(Channel& channel, const SegmentRequest& req, std::chrono::milliseconds timeout) {
  return decode_response(channel.exchange(encode_request(req), timeout), req);
}

ScoreResponse call_provider(Channel& channel, const ScoreRequest& req, std::chrono::milliseconds timeout) {
  return decode_response(channel.exchange(encode_request(req), timeout), req);
}

OracleProvider::OracleProvider(const Dataset& truth, OracleFidelity fidelity, double temperature)
    : fidelity_(fidelity), temperature_(temperature) {
  check_fidelity(fidelity_);
  for (const auto& im : truth.images) {
    auto [it, inserted] = by_path_.emplace(im.file_path, OracleScene::from_dataset(truth, im.id));
    if (!inserted) fail(ErrorCode::kInvalidArgument, "duplicate image file_path " + im.file_path);
    by_name_.emplace(std::filesystem::path(im.file_path).filename().string(), &it->second);
  }
}

const OracleScene& OracleProvider::resolve(std::string_view image_ref) const {
  if (const auto it = by_path_.find(image_ref); it != by_path_.end()) return it->second;
  const std::string name = std::filesystem::path(std::string(image_ref)).filename().string();
  if (const auto it = by_name_.find(name); it != by_name_.end()) return *it->second;
  fail(ErrorCode::kProviderError, "oracle has no ground truth for image_ref \"" + std::string(image_ref) + "\"");
}

SegmentResponse OracleProvider::segment(const SegmentRequest& req) {
  OracleFidelity f = fidelity_;
  f.candidates_per_prompt = req.candidates_per_prompt;
  return SegmentResponse{req.id, oracle_segment(resolve(req.image_ref), req.prompts, f)};
}

ScoreResponse OracleProvider::score(const ScoreRequest& req) {
  const OracleScene& scene = resolve(req.image_ref);
  try {
    return ScoreResponse{req.id, oracle_label_score(scene, req.masks, req.class_name, temperature_)};
  } catch (const Error& e) {
    // Unknown classes and mismatched masks surface as provider errors.
    fail(ErrorCode::kProviderError, e.what());
  }
}

std::string ProviderServer::handle(std::string_view line) {
  std::int64_t id = 0;
  try {
    const Request req = decode_request(line);
    return std::visit(
        [&](const auto& r) {
          id = r.id;
          auto resp = [&] {
            if constexpr (std::is_same_v<std::decay_t<decltype(r)>, SegmentRequest>) {
              return provider_.segment(r);
            } else {
              return provider_.score(r);
            }
          }();
          resp.id = r.id;
          return encode_response(resp);
        },
        req);
  } catch (const std::exception& e) {
    if (id == 0) {
      // Echo the id of a request that failed validation, when it has one.
      const auto j = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
      if (j.is_object() && j.contains("id") && j.at("id").is_number_integer()) id = j.at("id").get<std::int64_t>();
    }
    return encode_error(id, e.what());
  }
}

void ProviderServer::serve(std::istream& in, std::ostream& out) {
  out << handshake_line() << '\n' << std::flush;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << handle(line) << '\n' << std::flush;
  }
}

std::string LoopbackChannel::exchange(std::string_view line, std::chrono::milliseconds) { return server_.handle(line); }

SegmentResponse ChannelProvider::segment(const SegmentRequest& req) {
  SegmentRequest r = req;
  r.id = next_id_++;
  return call_provider(*channel_, r, timeout_);
}

ScoreResponse ChannelProvider::score(const ScoreRequest& req) {
  ScoreRequest r = req;
  r.id = next_id_++;
  return call_provider(*channel_, r, timeout_);
}

}  // namespace boxmend
