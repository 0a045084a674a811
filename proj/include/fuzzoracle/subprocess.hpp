// Copyright 2026 The Fuzzoracle Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Child-process plumbing: one-shot command execution with output capture
// and a deadline, plus a persistent line-protocol child for the external
// oracle. POSIX only.

#ifndef FUZZORACLE_SUBPROCESS_H_
#define FUZZORACLE_SUBPROCESS_H_

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fuzzoracle/util.hpp"

namespace fuzzoracle {

struct CommandResult {
  int exit_code = -1;       // valid when !signaled && !timed_out
  bool signaled = false;
  int term_signal = 0;
  bool timed_out = false;
  bool spawn_failed = false;  // exec did not happen (missing binary etc.)
  std::string std_out;
  std::string std_err;
  double duration_seconds = 0.0;

  bool ok() const {
    return !timed_out && !signaled && !spawn_failed && exit_code == 0;
  }
};

struct CommandSpec {
  std::vector<std::string> argv;
  std::optional<std::filesystem::path> cwd;
  std::vector<std::pair<std::string, std::string>> env;  // added to environ
  std::string stdin_data;
  // 0 disables the deadline.
  int timeout_seconds = 0;
};

namespace subprocess_detail {

inline void IgnoreSigpipeOnce() {
  static const bool done = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

inline std::vector<char *> MakeArgv(const std::vector<std::string> &args) {
  std::vector<char *> out;
  out.reserve(args.size() + 1);
  for (const auto &a : args) out.push_back(const_cast<char *>(a.c_str()));
  out.push_back(nullptr);
  return out;
}

}  // namespace subprocess_detail

// Tokenizes a command template. Whitespace separates tokens; single or
// double quotes group them. A token that is exactly "{key}" expands to the
// whole (possibly empty) value list; other tokens get single-value inline
// substitution.
inline std::vector<std::string> SubstituteCommandTemplate(
    std::string_view tmpl,
    const std::map<std::string, std::vector<std::string>> &vars) {
  std::vector<std::string> raw;
  std::string cur;
  bool in_token = false;
  char quote = 0;
  for (char c : tmpl) {
    if (quote != 0) {
      if (c == quote) {
        quote = 0;
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      in_token = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (in_token) {
        raw.push_back(cur);
        cur.clear();
        in_token = false;
      }
      continue;
    }
    cur += c;
    in_token = true;
  }
  if (in_token) raw.push_back(cur);

  std::vector<std::string> out;
  for (auto &tok : raw) {
    bool spliced = false;
    if (tok.size() > 2 && tok.front() == '{' && tok.back() == '}') {
      auto it = vars.find(tok.substr(1, tok.size() - 2));
      if (it != vars.end()) {
        for (const auto &v : it->second) out.push_back(v);
        spliced = true;
      }
    }
    if (spliced) continue;
    std::string expanded = tok;
    for (const auto &[key, vals] : vars) {
      const std::string pat = "{" + key + "}";
      size_t pos = 0;
      while ((pos = expanded.find(pat, pos)) != std::string::npos) {
        std::string joined;
        for (size_t i = 0; i < vals.size(); i++) {
          if (i) joined += ' ';
          joined += vals[i];
        }
        expanded.replace(pos, pat.size(), joined);
        pos += joined.size();
      }
    }
    out.push_back(expanded);
  }
  return out;
}

// Runs a command to completion, capturing stdout and stderr. The child is
// placed in its own process group so a deadline kill takes helpers with it.
inline CommandResult RunCommand(const CommandSpec &spec) {
  subprocess_detail::IgnoreSigpipeOnce();
  CommandResult result;
  if (spec.argv.empty()) {
    result.spawn_failed = true;
    return result;
  }

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
    throw EnvironmentError("pipe() failed");

  const auto t0 = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) throw EnvironmentError("fork() failed");

  if (pid == 0) {
    setpgid(0, 0);
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    if (spec.cwd && chdir(spec.cwd->c_str()) != 0) _exit(126);
    for (const auto &[k, v] : spec.env) setenv(k.c_str(), v.c_str(), 1);
    auto argv = subprocess_detail::MakeArgv(spec.argv);
    execvp(argv[0], argv.data());
    _exit(127);
  }

  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);
  fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
  fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
  fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

  size_t stdin_off = 0;
  bool stdin_open = !spec.stdin_data.empty();
  if (!stdin_open) close(in_pipe[1]);

  const auto deadline =
      t0 + std::chrono::seconds(spec.timeout_seconds > 0 ? spec.timeout_seconds
                                                         : 86400);
  bool out_open = true, err_open = true;
  char buf[8192];
  while (out_open || err_open || stdin_open) {
    struct pollfd fds[3];
    int nfds = 0;
    int out_idx = -1, err_idx = -1, in_idx = -1;
    if (out_open) {
      fds[nfds] = {out_pipe[0], POLLIN, 0};
      out_idx = nfds++;
    }
    if (err_open) {
      fds[nfds] = {err_pipe[0], POLLIN, 0};
      err_idx = nfds++;
    }
    if (stdin_open) {
      fds[nfds] = {in_pipe[1], POLLOUT, 0};
      in_idx = nfds++;
    }
    auto now = std::chrono::steady_clock::now();
    if (spec.timeout_seconds > 0 && now >= deadline) {
      result.timed_out = true;
      break;
    }
    int wait_ms = 200;
    if (spec.timeout_seconds > 0) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                      deadline - now)
                      .count();
      wait_ms = static_cast<int>(std::min<long long>(left + 1, 200));
    }
    int rc = poll(fds, static_cast<nfds_t>(nfds), wait_ms);
    if (rc < 0 && errno != EINTR) break;
    if (rc <= 0) continue;

    if (out_idx >= 0 && (fds[out_idx].revents & (POLLIN | POLLHUP))) {
      ssize_t n = read(out_pipe[0], buf, sizeof buf);
      if (n > 0) {
        result.std_out.append(buf, static_cast<size_t>(n));
      } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
        close(out_pipe[0]);
        out_open = false;
      }
    }
    if (err_idx >= 0 && (fds[err_idx].revents & (POLLIN | POLLHUP))) {
      ssize_t n = read(err_pipe[0], buf, sizeof buf);
      if (n > 0) {
        result.std_err.append(buf, static_cast<size_t>(n));
      } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
        close(err_pipe[0]);
        err_open = false;
      }
    }
    if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
      if (fds[in_idx].revents & (POLLERR | POLLHUP)) {
        close(in_pipe[1]);
        stdin_open = false;
      } else {
        ssize_t n = write(in_pipe[1], spec.stdin_data.data() + stdin_off,
                          spec.stdin_data.size() - stdin_off);
        if (n > 0) stdin_off += static_cast<size_t>(n);
        if (n < 0 && errno != EAGAIN && errno != EINTR) {
          close(in_pipe[1]);
          stdin_open = false;
        } else if (stdin_off >= spec.stdin_data.size()) {
          close(in_pipe[1]);
          stdin_open = false;
        }
      }
    }
  }

  if (result.timed_out) {
    kill(-pid, SIGKILL);
    kill(pid, SIGKILL);
    if (stdin_open) close(in_pipe[1]);
    if (out_open) close(out_pipe[0]);
    if (err_open) close(err_pipe[0]);
  }

  int status = 0;
  waitpid(pid, &status, 0);
  const auto t1 = std::chrono::steady_clock::now();
  result.duration_seconds =
      std::chrono::duration<double>(t1 - t0).count();
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
    if (result.exit_code == 127) result.spawn_failed = true;
  } else if (WIFSIGNALED(status)) {
    result.signaled = true;
    result.term_signal = WTERMSIG(status);
  }
  return result;
}

// A child process spoken to over stdin/stdout, one line at a time. Used for
// the external oracle protocol; requests are serialized by the caller.
class LineProtocolProcess {
 public:
  explicit LineProtocolProcess(const std::vector<std::string> &argv) {
    subprocess_detail::IgnoreSigpipeOnce();
    if (argv.empty()) throw OracleUnavailable("empty oracle command");
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
      throw EnvironmentError("pipe() failed");
    pid_ = fork();
    if (pid_ < 0) throw EnvironmentError("fork() failed");
    if (pid_ == 0) {
      setpgid(0, 0);
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      close(in_pipe[0]);
      close(in_pipe[1]);
      close(out_pipe[0]);
      close(out_pipe[1]);
      auto cargv = subprocess_detail::MakeArgv(argv);
      execvp(cargv[0], cargv.data());
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    write_fd_ = in_pipe[1];
    read_fd_ = out_pipe[0];
    fcntl(read_fd_, F_SETFL, O_NONBLOCK);
  }

  LineProtocolProcess(const LineProtocolProcess &) = delete;
  LineProtocolProcess &operator=(const LineProtocolProcess &) = delete;

  ~LineProtocolProcess() { Shutdown(); }

  bool WriteLine(const std::string &line) {
    std::string payload = line;
    payload += '\n';
    size_t off = 0;
    while (off < payload.size()) {
      ssize_t n = write(write_fd_, payload.data() + off, payload.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      off += static_cast<size_t>(n);
    }
    return true;
  }

  // Reads one newline-terminated line; empty optional on timeout or EOF.
  std::optional<std::string> ReadLine(int timeout_seconds) {
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::seconds(timeout_seconds);
    while (true) {
      size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      auto now = std::chrono::steady_clock::now();
      if (now >= deadline) return std::nullopt;
      auto left_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         deadline - now)
                         .count();
      struct pollfd pfd = {read_fd_, POLLIN, 0};
      int rc = poll(&pfd, 1, static_cast<int>(std::min<long long>(left_ms, 200)));
      if (rc < 0 && errno != EINTR) return std::nullopt;
      if (rc <= 0) continue;
      char buf[4096];
      ssize_t n = read(read_fd_, buf, sizeof buf);
      if (n > 0) {
        buffer_.append(buf, static_cast<size_t>(n));
      } else if (n == 0) {
        return std::nullopt;  // EOF: child closed stdout
      } else if (errno != EAGAIN && errno != EINTR) {
        return std::nullopt;
      }
    }
  }

  // True while the child has neither exited nor been reaped.
  bool Alive() {
    if (pid_ <= 0) return false;
    int status = 0;
    pid_t rc = waitpid(pid_, &status, WNOHANG);
    if (rc == pid_) {
      exited_ = true;
      exit_status_ = status;
      pid_ = -1;
      return false;
    }
    return rc == 0;
  }

  bool Exited() const { return exited_; }

  void Shutdown() {
    if (write_fd_ >= 0) {
      close(write_fd_);
      write_fd_ = -1;
    }
    if (read_fd_ >= 0) {
      close(read_fd_);
      read_fd_ = -1;
    }
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      int status = 0;
      waitpid(pid_, &status, 0);
      pid_ = -1;
      exited_ = true;
    }
  }

 private:
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::string buffer_;
  bool exited_ = false;
  int exit_status_ = 0;
};

}  // namespace fuzzoracle

#endif  // FUZZORACLE_SUBPROCESS_H_
