/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <sys/types.h>

#include "boxmend/provider.hpp"

namespace boxmend {

struct WorkerOptions {
  std::string command;  // run through /bin/sh -c
  std::chrono::milliseconds startup_timeout{300'000};
};

/// One spawned provider process talking NDJSON over its stdin/stdout.
/// Spawning waits for the handshake line. One request in flight at a time.
class WorkerProcess final : public Channel {
 public:
  explicit WorkerProcess(const WorkerOptions& options);
  ~WorkerProcess() override;

  WorkerProcess(const WorkerProcess&) = delete;
  WorkerProcess& operator=(const WorkerProcess&) = delete;

  /// Throws Timeout (the worker is then killed), ChannelClosed.
  std::string exchange(std::string_view line, std::chrono::milliseconds timeout) override;

  bool alive() const { return fd_ >= 0; }
  pid_t pid() const { return pid_; }

 private:
  std::string read_line(std::chrono::steady_clock::time_point deadline);
  void shutdown();

  std::mutex mutex_;
  int fd_ = -1;
  pid_t pid_ = -1;
  std::string buffer_;
};

/// Fixed-size pool of workers; exchange() borrows an idle worker, so the pool
/// can be shared by concurrent pipeline tasks. Dead workers are respawned on
/// the next borrow.
class WorkerPool final : public Channel {
 public:
  /// Spawns `size` workers eagerly; throws ChannelClosed/Timeout/ProtocolError
  /// if any fails to start.
  WorkerPool(WorkerOptions options, std::size_t size);

  std::string exchange(std::string_view line, std::chrono::milliseconds timeout) override;
  std::size_t size() const { return slots_.size(); }

 private:
  WorkerOptions options_;
  std::mutex mutex_;
  std::condition_variable idle_cv_;
  std::vector<std::unique_ptr<WorkerProcess>> slots_;
  std::vector<bool> busy_;
};

}  // namespace boxmend
