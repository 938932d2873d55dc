/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "boxmend/geometry.hpp"
#include "boxmend/mask.hpp"

namespace boxmend {

// NDJSON messages exchanged with out-of-process mask providers. One JSON
// object per line, UTF-8, no pretty-printing, masks as uncompressed COCO RLE.
//
//   {"id":1,"op":"segment","image_ref":"scenes/0001.png",
//    "prompts":[{"kind":"point","point":[34.5,20.0]}],"candidates_per_prompt":3}
//   {"id":1,"results":[[{"mask":{"size":[h,w],"counts":[...]},"score":0.9},...]]}
//   {"id":2,"op":"score","image_ref":"...","masks":[...],"class_name":"dog"}
//   {"id":2,"scores":[0.7,0.3]}
//   {"id":1,"error":"..."}
//
// A worker announces itself with the handshake line {"protocol":"boxmend/1"}.

inline constexpr std::string_view kProtocolName = "boxmend/1";

enum class PromptKind { kBox, kPoint };

struct Prompt {
  PromptKind kind = PromptKind::kPoint;
  std::array<double, 4> box{};  // corner form x1, y1, x2, y2
  Point point;

  static Prompt from_box(const Box& b);
  static Prompt from_point(Point p);

  friend bool operator==(const Prompt&, const Prompt&) = default;
};

struct SegmentRequest {
  std::int64_t id = 0;
  std::string image_ref;
  std::vector<Prompt> prompts;
  int candidates_per_prompt = 3;

  friend bool operator==(const SegmentRequest&, const SegmentRequest&) = default;
};

struct ScoredMask {
  Mask mask;
  double score = 0.0;

  friend bool operator==(const ScoredMask&, const ScoredMask&) = default;
};

struct SegmentResponse {
  std::int64_t id = 0;
  std::vector<std::vector<ScoredMask>> results;

  friend bool operator==(const SegmentResponse&, const SegmentResponse&) = default;
};

struct ScoreRequest {
  std::int64_t id = 0;
  std::string image_ref;
  std::vector<Mask> masks;
  std::string class_name;

  friend bool operator==(const ScoreRequest&, const ScoreRequest&) = default;
};

struct ScoreResponse {
  std::int64_t id = 0;
  std::vector<double> scores;

  friend bool operator==(const ScoreResponse&, const ScoreResponse&) = default;
};

using Request = std::variant<SegmentRequest, ScoreRequest>;

/// Encoders return one line without the trailing newline.
std::string encode_request(const SegmentRequest& req);
std::string encode_request(const ScoreRequest& req);
std::string encode_response(const SegmentResponse& resp);
std::string encode_response(const ScoreResponse& resp);
std::string encode_error(std::int64_t id, std::string_view message);
std::string handshake_line();

/// Worker side. Throws ProtocolError on malformed lines or unknown "op".
Request decode_request(std::string_view line);

/// Client side; validated against the request that produced it. Throws
/// ProtocolError (malformed JSON, id mismatch, wrong list arity, score out of
/// range) or ProviderError (an {"id":n,"error":msg} line).
SegmentResponse decode_response(std::string_view line, const SegmentRequest& req);
ScoreResponse decode_response(std::string_view line, const ScoreRequest& req);

/// Throws ProtocolError unless `line` is a handshake for kProtocolName.
void check_handshake(std::string_view line);

/// Tolerance on the sum of a score vector.
inline constexpr double kScoreSumTolerance = 1e-6;

}  // namespace boxmend
