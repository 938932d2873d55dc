/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/protocol.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "boxmend/error.hpp"

namespace boxmend {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

namespace {

json parse_line(std::string_view line) {
  try {
    json j = json::parse(line.begin(), line.end());
    if (!j.is_object()) fail(ErrorCode::kProtocolError, "message must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kProtocolError, std::string("malformed JSON: ") + e.what());
  }
}

std::int64_t get_id(const json& j) {
  if (!j.contains("id") || !j.at("id").is_number_integer()) fail(ErrorCode::kProtocolError, "missing integer \"id\"");
  return j.at("id").get<std::int64_t>();
}

ojson prompt_to_json(const Prompt& p) {
  ojson j;
  if (p.kind == PromptKind::kBox) {
    j["kind"] = "box";
    j["box"] = p.box;
  } else {
    j["kind"] = "point";
    j["point"] = {p.point.x, p.point.y};
  }
  return j;
}

std::vector<double> numbers(const json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) {
    fail(ErrorCode::kProtocolError, std::string(what) + " must be an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(ErrorCode::kProtocolError, std::string(what) + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Prompt prompt_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    fail(ErrorCode::kProtocolError, "prompt needs a string \"kind\"");
  }
  const auto kind = j.at("kind").get<std::string>();
  Prompt p;
  if (kind == "box") {
    if (!j.contains("box") || j.contains("point")) fail(ErrorCode::kProtocolError, "box prompt must carry exactly \"box\"");
    const auto v = numbers(j.at("box"), 4, "box");
    p.kind = PromptKind::kBox;
    p.box = {v[0], v[1], v[2], v[3]};
  } else if (kind == "point") {
    if (!j.contains("point") || j.contains("box")) fail(ErrorCode::kProtocolError, "point prompt must carry exactly \"point\"");
    const auto v = numbers(j.at("point"), 2, "point");
    p.kind = PromptKind::kPoint;
    p.point = {v[0], v[1]};
  } else {
    fail(ErrorCode::kProtocolError, "unknown prompt kind \"" + kind + "\"");
  }
  return p;
}

Mask mask_from_wire(const json& j) {
  try {
    return rle_decode(rle_from_json(j));
  } catch (const Error& e) {
    fail(ErrorCode::kProtocolError, std::string("bad mask: ") + e.what());
  }
}

ojson masks_to_json(const std::vector<Mask>& masks) {
  ojson arr = ojson::array();
  for (const auto& m : masks) arr.push_back(rle_to_json(rle_encode(m)));
  return arr;
}

// Shared checks for any response line: error lines, id echo, op echo.
json open_response(std::string_view line, std::int64_t expected_id, std::string_view op) {
  json j = parse_line(line);
  if (j.contains("error")) {
    const std::string msg = j.at("error").is_string() ? j.at("error").get<std::string>() : j.at("error").dump();
    if (j.contains("id") && j.at("id").is_number_integer() && j.at("id").get<std::int64_t>() != expected_id) {
      fail(ErrorCode::kProtocolError, "error line for id " + std::to_string(j.at("id").get<std::int64_t>()) +
                                          ", expected " + std::to_string(expected_id));
    }
    fail(ErrorCode::kProviderError, msg);
  }
  const auto id = get_id(j);
  if (id != expected_id) {
    fail(ErrorCode::kProtocolError, "id mismatch: got " + std::to_string(id) + ", expected " + std::to_string(expected_id));
  }
  if (j.contains("op")) {
    if (!j.at("op").is_string() || j.at("op").get<std::string>() != op) {
      fail(ErrorCode::kProtocolError, "unexpected \"op\" in response: " + j.at("op").dump());
    }
  }
  return j;
}

double check_score(const json& v) {
  if (!v.is_number()) fail(ErrorCode::kProtocolError, "score must be a number");
  const double s = v.get<double>();
  if (!std::isfinite(s) || s < 0.0 || s > 1.0) fail(ErrorCode::kProtocolError, "score outside [0, 1]");
  return s;
}

}  // namespace

Prompt Prompt::from_box(const Box& b) {
  Prompt p;
  p.kind = PromptKind::kBox;
  p.box = b.corners();
  return p;
}

Prompt Prompt::from_point(Point pt) {
  Prompt p;
  p.kind = PromptKind::kPoint;
  p.point = pt;
  return p;
}

std::string encode_request(const SegmentRequest& req) {
  ojson j;
  j["id"] = req.id;
  j["op"] = "segment";
  j["image_ref"] = req.image_ref;
  j["prompts"] = ojson::array();
  for (const auto& p : req.prompts) j["prompts"].push_back(prompt_to_json(p));
  j["candidates_per_prompt"] = req.candidates_per_prompt;
  return j.dump();
}

std::string encode_request(const ScoreRequest& req) {
  ojson j;
  j["id"] = req.id;
  j["op"] = "score";
  j["image_ref"] = req.image_ref;
  j["masks"] = masks_to_json(req.masks);
  j["class_name"] = req.class_name;
  return j.dump();
}

std::string encode_response(const SegmentResponse& resp) {
  ojson j;
  j["id"] = resp.id;
  j["results"] = ojson::array();
  for (const auto& per_prompt : resp.results) {
    ojson arr = ojson::array();
    for (const auto& c : per_prompt) {
      ojson e;
      e["mask"] = rle_to_json(rle_encode(c.mask));
      e["score"] = c.score;
      arr.push_back(std::move(e));
    }
    j["results"].push_back(std::move(arr));
  }
  return j.dump();
}

std::string encode_response(const ScoreResponse& resp) {
  ojson j;
  j["id"] = resp.id;
  j["scores"] = resp.scores;
  return j.dump();
}

std::string encode_error(std::int64_t id, std::string_view message) {
  ojson j;
  j["id"] = id;
  j["error"] = std::string(message);
  return j.dump();
}

std::string handshake_line() {
  ojson j;
  j["protocol"] = std::string(kProtocolName);
  return j.dump();
}

Request decode_request(std::string_view line) {
  const json j = parse_line(line);
  const auto id = get_id(j);
  if (!j.contains("op") || !j.at("op").is_string()) fail(ErrorCode::kProtocolError, "missing string \"op\"");
  const auto op = j.at("op").get<std::string>();
  if (!j.contains("image_ref") || !j.at("image_ref").is_string()) fail(ErrorCode::kProtocolError, "missing string \"image_ref\"");
  const auto image_ref = j.at("image_ref").get<std::string>();

  if (op == "segment") {
    SegmentRequest req;
    req.id = id;
    req.image_ref = image_ref;
    if (!j.contains("prompts") || !j.at("prompts").is_array()) fail(ErrorCode::kProtocolError, "\"prompts\" must be an array");
    for (const auto& p : j.at("prompts")) req.prompts.push_back(prompt_from_json(p));
    if (!j.contains("candidates_per_prompt") || !j.at("candidates_per_prompt").is_number_integer() ||
        j.at("candidates_per_prompt").get<int>() < 1) {
      fail(ErrorCode::kProtocolError, "\"candidates_per_prompt\" must be a positive integer");
    }
    req.candidates_per_prompt = j.at("candidates_per_prompt").get<int>();
    return req;
  }
  if (op == "score") {
    ScoreRequest req;
    req.id = id;
    req.image_ref = image_ref;
    if (!j.contains("masks") || !j.at("masks").is_array()) fail(ErrorCode::kProtocolError, "\"masks\" must be an array");
    for (const auto& m : j.at("masks")) req.masks.push_back(mask_from_wire(m));
    if (!j.contains("class_name") || !j.at("class_name").is_string()) fail(ErrorCode::kProtocolError, "missing string \"class_name\"");
    req.class_name = j.at("class_name").get<std::string>();
    return req;
  }
  fail(ErrorCode::kProtocolError, "unknown op \"" + op + "\"");
}

SegmentResponse decode_response(std::string_view line, const SegmentRequest& req) {
  const json j = open_response(line, req.id, "segment");
  if (!j.contains("results") || !j.at("results").is_array()) fail(ErrorCode::kProtocolError, "\"results\" must be an array");
  const json& results = j.at("results");
  if (results.size() != req.prompts.size()) {
    fail(ErrorCode::kProtocolError, "arity: " + std::to_string(results.size()) + " results for " +
                                        std::to_string(req.prompts.size()) + " prompts");
  }
  SegmentResponse resp;
  resp.id = req.id;
  for (const auto& per_prompt : results) {
    if (!per_prompt.is_array() || per_prompt.size() != static_cast<std::size_t>(req.candidates_per_prompt)) {
      fail(ErrorCode::kProtocolError, "arity: expected " + std::to_string(req.candidates_per_prompt) + " candidates per prompt");
    }
    std::vector<ScoredMask> cands;
    for (const auto& c : per_prompt) {
      if (!c.is_object() || !c.contains("mask") || !c.contains("score")) {
        fail(ErrorCode::kProtocolError, "candidate needs \"mask\" and \"score\"");
      }
      cands.push_back(ScoredMask{mask_from_wire(c.at("mask")), check_score(c.at("score"))});
    }
    resp.results.push_back(std::move(cands));
  }
  return resp;
}

ScoreResponse decode_response(std::string_view line, const ScoreRequest& req) {
  const json j = open_response(line, req.id, "score");
  if (!j.contains("scores") || !j.at("scores").is_array()) fail(ErrorCode::kProtocolError, "\"scores\" must be an array");
  const json& scores = j.at("scores");
  if (scores.size() != req.masks.size()) {
    fail(ErrorCode::kProtocolError, "arity: " + std::to_string(scores.size()) + " scores for " +
                                        std::to_string(req.masks.size()) + " masks");
  }
  ScoreResponse resp;
  resp.id = req.id;
  double sum = 0.0;
  for (const auto& s : scores) {
    resp.scores.push_back(check_score(s));
    sum += resp.scores.back();
  }
  if (!resp.scores.empty() && std::abs(sum - 1.0) > kScoreSumTolerance) {
    fail(ErrorCode::kProtocolError, "scores sum to " + std::to_string(sum) + ", expected 1");
  }
  return resp;
}

void check_handshake(std::string_view line) {
  const json j = parse_line(line);
  if (!j.contains("protocol") || !j.at("protocol").is_string() || j.at("protocol").get<std::string>() != kProtocolName) {
    fail(ErrorCode::kProtocolError, "bad handshake: " + std::string(line));
  }
}

}  // namespace boxmend
