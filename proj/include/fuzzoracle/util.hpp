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

#ifndef FUZZORACLE_UTIL_H_
#define FUZZORACLE_UTIL_H_

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fuzzoracle {

// Error taxonomy. Environment errors abort a run (exit 1); configuration
// errors reject the invocation (exit 2); everything else is contained at
// the stage that raised it.
class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnparsableSource : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedSpec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OracleUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OracleProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInventory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingSignature : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyCompletion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedSignature : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AttemptsExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ToolchainMissing : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

class NoSourcesFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace log_detail {
inline std::mutex &LogMutex() {
  static std::mutex mu;
  return mu;
}
inline bool &Quiet() {
  static bool quiet = false;
  return quiet;
}
}  // namespace log_detail

inline void SetLogQuiet(bool quiet) { log_detail::Quiet() = quiet; }

inline void LogInfo(const std::string &msg) {
  if (log_detail::Quiet()) return;
  std::lock_guard<std::mutex> lock(log_detail::LogMutex());
  std::fprintf(stderr, "[+] %s\n", msg.c_str());
}

inline void LogWarn(const std::string &msg) {
  if (log_detail::Quiet()) return;
  std::lock_guard<std::mutex> lock(log_detail::LogMutex());
  std::fprintf(stderr, "[!] %s\n", msg.c_str());
}

inline void LogError(const std::string &msg) {
  std::lock_guard<std::mutex> lock(log_detail::LogMutex());
  std::fprintf(stderr, "[E] %s\n", msg.c_str());
}

inline std::string ReadFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void WriteFile(const std::filesystem::path &path,
                      std::string_view content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

inline std::string ToLower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

inline bool ContainsCaseInsensitive(std::string_view haystack,
                                    std::string_view needle) {
  if (needle.empty()) return true;
  return ToLower(haystack).find(ToLower(needle)) != std::string::npos;
}

inline std::string Trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) b++;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) e--;
  return std::string(s.substr(b, e - b));
}

// FNV-1a, used to key replay fixtures and derive stable run ids.
inline uint64_t Fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string Fnv1a64Hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(Fnv1a64(data)));
  return std::string(buf);
}

inline std::string Iso8601Utc(std::time_t t) {
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return std::string(buf);
}

inline std::string NowIso8601Utc() { return Iso8601Utc(std::time(nullptr)); }

}  // namespace fuzzoracle

#endif  // FUZZORACLE_UTIL_H_
