// Copyright 2026 The Hypertune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hypertune/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>

#include "hypertune/protocol.hpp"

namespace hypertune {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe_once() {
  static std::once_flag flag;
  // a child dying before it reads its request must not kill the engine
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

double remaining_seconds(Clock::time_point deadline) {
  return std::chrono::duration<double>(deadline - Clock::now()).count();
}

struct ChildProcess {
  pid_t pid = -1;
  int stdin_fd = -1;
  int stdout_fd = -1;
};

void close_quiet(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

// Kills the child and reaps it unconditionally; used on timeout and on
// error paths so no zombies accumulate.
void kill_and_reap(ChildProcess& child) {
  if (child.pid > 0) {
    ::kill(child.pid, SIGKILL);
    int status = 0;
    ::waitpid(child.pid, &status, 0);
    child.pid = -1;
  }
  close_quiet(child.stdin_fd);
  close_quiet(child.stdout_fd);
}

bool spawn(const std::vector<std::string>& argv, ChildProcess& child,
           std::string& error) {
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) {
    error = std::string("pipe failed: ") + std::strerror(errno);
    return false;
  }
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    error = std::string("pipe failed: ") + std::strerror(errno);
    ::close(to_child[0]);
    ::close(to_child[1]);
    return false;
  }

  std::vector<char*> args;
  args.reserve(argv.size() + 1);
  for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) {
    error = std::string("fork failed: ") + std::strerror(errno);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    return false;
  }
  if (pid == 0) {
    // child: only async-signal-safe calls until exec
    if (::dup2(to_child[0], STDIN_FILENO) < 0 ||
        ::dup2(from_child[1], STDOUT_FILENO) < 0) {
      ::_exit(127);
    }
    ::execvp(args[0], args.data());
    ::_exit(127);
  }

  ::close(to_child[0]);
  ::close(from_child[1]);
  child.pid = pid;
  child.stdin_fd = to_child[1];
  child.stdout_fd = from_child[0];
  return true;
}

// Writes the whole request line; the child may legitimately exit first
// (EPIPE), which surfaces later as a protocol or exit-code failure.
void write_request(int fd, const std::string& line) {
  size_t off = 0;
  while (off < line.size()) {
    const ssize_t n = ::write(fd, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return;
    }
    off += static_cast<size_t>(n);
  }
}

enum class ReadResult { kLine, kEof, kDeadline };

ReadResult read_line(int fd, Clock::time_point deadline, std::string& buffer) {
  char chunk[4096];
  while (buffer.find('\n') == std::string::npos) {
    const double left = remaining_seconds(deadline);
    if (left <= 0.0) return ReadResult::kDeadline;
    struct pollfd pfd{fd, POLLIN, 0};
    const int pr = ::poll(&pfd, 1, static_cast<int>(left * 1000.0) + 1);
    if (pr < 0) {
      if (errno == EINTR) continue;
      return ReadResult::kEof;
    }
    if (pr == 0) return ReadResult::kDeadline;
    const ssize_t n = ::read(fd, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      return ReadResult::kEof;
    }
    if (n == 0) return ReadResult::kEof;
    buffer.append(chunk, static_cast<size_t>(n));
  }
  return ReadResult::kLine;
}

// Waits for the child to exit before the deadline; returns false on expiry.
bool wait_exit(ChildProcess& child, Clock::time_point deadline, int& exit_code) {
  for (;;) {
    int status = 0;
    const pid_t r = ::waitpid(child.pid, &status, WNOHANG);
    if (r == child.pid) {
      child.pid = -1;
      exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
      return true;
    }
    if (r < 0 && errno != EINTR) {
      child.pid = -1;
      exit_code = 127;
      return true;
    }
    if (remaining_seconds(deadline) <= 0.0) return false;
    struct timespec ts{0, 2'000'000};  // 2 ms
    ::nanosleep(&ts, nullptr);
  }
}

}  // namespace

ExternalEvaluator::ExternalEvaluator(std::vector<std::string> argv)
    : argv_(std::move(argv)) {
  if (argv_.empty()) throw std::invalid_argument("empty evaluator command");
  ignore_sigpipe_once();
}

EvalOutcome ExternalEvaluator::evaluate(const EvalTask& task) {
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(task.budget_seconds));

  ChildProcess child;
  std::string spawn_error;
  if (!spawn(argv_, child, spawn_error)) {
    return {EvalStatus::kFailed, 0.0, spawn_error};
  }

  write_request(child.stdin_fd, build_request_line(task) + "\n");
  close_quiet(child.stdin_fd);  // one request per process; signal EOF

  std::string buffer;
  const ReadResult rr = read_line(child.stdout_fd, deadline, buffer);
  if (rr == ReadResult::kDeadline) {
    kill_and_reap(child);
    return {EvalStatus::kTimeout, 0.0, {}};
  }
  close_quiet(child.stdout_fd);

  int exit_code = 0;
  if (!wait_exit(child, deadline, exit_code)) {
    kill_and_reap(child);
    return {EvalStatus::kTimeout, 0.0, {}};
  }

  if (rr == ReadResult::kEof && buffer.empty()) {
    return {EvalStatus::kFailed, 0.0,
            "no response (exit code " + std::to_string(exit_code) + ")"};
  }
  if (exit_code != 0) {
    return {EvalStatus::kFailed, 0.0, "exit code " + std::to_string(exit_code)};
  }
  const std::string line = buffer.substr(0, buffer.find('\n'));
  return parse_response_line(line);
}

}  // namespace hypertune
