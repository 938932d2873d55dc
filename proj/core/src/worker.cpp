/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/worker.hpp"

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <thread>

#include "boxmend/error.hpp"

extern char** environ;

namespace boxmend {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kMaxLineBytes = 1u << 30;

}  // namespace

WorkerProcess::WorkerProcess(const WorkerOptions& options) {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    fail(ErrorCode::kChannelClosed, std::string("socketpair: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);

  const std::string sh = "/bin/sh";
  const std::string dash_c = "-c";
  std::string cmd = options.command;
  char* argv[] = {const_cast<char*>(sh.c_str()), const_cast<char*>(dash_c.c_str()), cmd.data(), nullptr};
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);
  const int rc = ::posix_spawn(&pid_, sh.c_str(), &actions, &attr, argv, environ);
  posix_spawnattr_destroy(&attr);
  posix_spawn_file_actions_destroy(&actions);
  ::close(fds[1]);
  if (rc != 0) {
    ::close(fds[0]);
    pid_ = -1;
    fail(ErrorCode::kChannelClosed, "cannot spawn worker \"" + options.command + "\": " + std::strerror(rc));
  }
  fd_ = fds[0];
  try {
    check_handshake(read_line(Clock::now() + options.startup_timeout));
  } catch (...) {
    shutdown();
    throw;
  }
}

WorkerProcess::~WorkerProcess() { shutdown(); }

void WorkerProcess::shutdown() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    // Closing the socket is the polite stop signal; escalate if ignored.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(-pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

std::string WorkerProcess::read_line(Clock::time_point deadline) {
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (fd_ < 0) fail(ErrorCode::kChannelClosed, "worker channel is closed");
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) fail(ErrorCode::kTimeout, "worker did not answer in time");
    pollfd p{fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(std::min<std::int64_t>(remaining.count(), 1'000'000)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::kChannelClosed, std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[65536];
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      fail(ErrorCode::kChannelClosed, std::string("recv: ") + std::strerror(errno));
    }
    if (n == 0) fail(ErrorCode::kChannelClosed, "worker closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
    if (buffer_.size() > kMaxLineBytes) fail(ErrorCode::kProtocolError, "response line too long");
  }
}

std::string WorkerProcess::exchange(std::string_view line, std::chrono::milliseconds timeout) {
  std::lock_guard lock(mutex_);
  if (fd_ < 0) fail(ErrorCode::kChannelClosed, "worker channel is closed");
  const auto deadline = Clock::now() + timeout;
  std::string out(line);
  out += '\n';
  std::size_t sent = 0;
  while (sent < out.size()) {
    const ssize_t n = ::send(fd_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string why = std::strerror(errno);
      shutdown();
      fail(ErrorCode::kChannelClosed, "send: " + why);
    }
    sent += static_cast<std::size_t>(n);
  }
  try {
    return read_line(deadline);
  } catch (const Error& e) {
    // A worker that timed out or hung up holds unknown state; drop it.
    shutdown();
    throw;
  }
}

WorkerPool::WorkerPool(WorkerOptions options, std::size_t size) : options_(std::move(options)) {
  if (size == 0) fail(ErrorCode::kInvalidArgument, "worker pool needs at least one worker");
  for (std::size_t i = 0; i < size; ++i) slots_.push_back(std::make_unique<WorkerProcess>(options_));
  busy_.assign(size, false);
}

std::string WorkerPool::exchange(std::string_view line, std::chrono::milliseconds timeout) {
  std::size_t slot = 0;
  {
    std::unique_lock lock(mutex_);
    idle_cv_.wait(lock, [this] { return std::find(busy_.begin(), busy_.end(), false) != busy_.end(); });
    slot = static_cast<std::size_t>(std::find(busy_.begin(), busy_.end(), false) - busy_.begin());
    busy_[slot] = true;
  }
  struct Release {
    WorkerPool* pool;
    std::size_t slot;
    ~Release() {
      {
        std::lock_guard lock(pool->mutex_);
        pool->busy_[slot] = false;
      }
      pool->idle_cv_.notify_one();
    }
  } release{this, slot};

  auto& worker = slots_[slot];
  if (!worker || !worker->alive()) {
    worker.reset();
    worker = std::make_unique<WorkerProcess>(options_);
  }
  return worker->exchange(line, timeout);
}

}  // namespace boxmend
