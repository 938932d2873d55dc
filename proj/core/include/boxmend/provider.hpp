/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "boxmend/oracle.hpp"
#include "boxmend/protocol.hpp"

namespace boxmend {

/// Source of candidate masks (segment) and label scores (score). The
/// correction pipeline only talks to this interface.
class MaskProvider {
 public:
  virtual ~MaskProvider() = default;
  virtual SegmentResponse segment(const SegmentRequest& req) = 0;
  virtual ScoreResponse score(const ScoreRequest& req) = 0;
};

/// Line transport: sends one request line, returns one response line.
/// Implementations here are safe to call from several threads.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual std::string exchange(std::string_view line, std::chrono::milliseconds timeout) = 0;
};

inline constexpr std::chrono::milliseconds kDefaultRequestTimeout{120'000};

/// Encode, exchange, decode and validate against the request.
/// Throws Timeout, ChannelClosed, ProtocolError or ProviderError.
SegmentResponse call_provider(Channel& channel, const SegmentRequest& req,
                              std::chrono::milliseconds timeout = kDefaultRequestTimeout);
ScoreResponse call_provider(Channel& channel, const ScoreRequest& req,
                            std::chrono::milliseconds timeout = kDefaultRequestTimeout);

/// In-process oracle provider backed by ground-truth instance masks.
class OracleProvider final : public MaskProvider {
 public:
  /// Every image of `truth` must carry instance masks for all annotations.
  OracleProvider(const Dataset& truth, OracleFidelity fidelity, double temperature = kDefaultLabelTemperature);

  SegmentResponse segment(const SegmentRequest& req) override;
  ScoreResponse score(const ScoreRequest& req) override;

  /// Matches by exact file_path, then by file name. Throws ProviderError.
  const OracleScene& resolve(std::string_view image_ref) const;

 private:
  std::map<std::string, OracleScene, std::less<>> by_path_;
  std::map<std::string, const OracleScene*, std::less<>> by_name_;
  OracleFidelity fidelity_;
  double temperature_;
};

/// Worker-side dispatcher: request line in, response (or error) line out.
class ProviderServer {
 public:
  explicit ProviderServer(MaskProvider& provider) : provider_(provider) {}

  std::string handle(std::string_view line);

  /// Handshake, then one response per request line until EOF.
  void serve(std::istream& in, std::ostream& out);

 private:
  MaskProvider& provider_;
};

/// Channel that hands lines straight to an in-process server.
class LoopbackChannel final : public Channel {
 public:
  explicit LoopbackChannel(ProviderServer& server) : server_(server) {}
  std::string exchange(std::string_view line, std::chrono::milliseconds timeout) override;

 private:
  ProviderServer& server_;
};

/// MaskProvider speaking the wire protocol over a channel. Assigns fresh
/// request ids so ids are unique per session.
class ChannelProvider final : public MaskProvider {
 public:
  explicit ChannelProvider(std::shared_ptr<Channel> channel, std::chrono::milliseconds timeout = kDefaultRequestTimeout)
      : channel_(std::move(channel)), timeout_(timeout) {}

  SegmentResponse segment(const SegmentRequest& req) override;
  ScoreResponse score(const ScoreRequest& req) override;

 private:
  std::shared_ptr<Channel> channel_;
  std::chrono::milliseconds timeout_;
  std::atomic<std::int64_t> next_id_{1};
};

}  // namespace boxmend
