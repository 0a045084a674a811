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
// Generation backends: a chat-completion HTTP client and a bit-exact
// replay backend keyed by prompt hash. Both satisfy one interface so the
// synthesis loop never knows which one it is talking to.

#ifndef FUZZORACLE_BACKEND_H_
#define FUZZORACLE_BACKEND_H_

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "fuzzoracle/synthesis.hpp"
#include "fuzzoracle/util.hpp"

// cpp-httplib is header-only; keep the build lean.
#define CPPHTTPLIB_OPENSSL_SUPPORT_DISABLED
#include <httplib.h>

namespace fuzzoracle {

class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  // Returns the raw completion text. Throws BackendUnavailable when the
  // backend cannot serve the request at all.
  virtual std::string Complete(const std::string &prompt) = 0;
  virtual std::string Name() const = 0;
};

// Replays canned completions from `<dir>/<fnv1a64(prompt)>.txt`. Missing
// fixture means the backend cannot answer, mirroring an unreachable server.
class ReplayBackend : public GenerationBackend {
 public:
  explicit ReplayBackend(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::string Complete(const std::string &prompt) override {
    const auto path = dir_ / (Fnv1a64Hex(prompt) + ".txt");
    if (!std::filesystem::exists(path))
      throw BackendUnavailable("no replay fixture " + path.string());
    return ReadFile(path);
  }

  std::string Name() const override { return "replay:" + dir_.string(); }

  // Where a fixture for `prompt` would live; used by recording tooling.
  std::filesystem::path FixturePath(const std::string &prompt) const {
    return dir_ / (Fnv1a64Hex(prompt) + ".txt");
  }

 private:
  std::filesystem::path dir_;
};

struct HttpBackendConfig {
  std::string base_url;  // e.g. "http://localhost:8080"
  std::string model = "gpt-4";
  double temperature = 0.0;
  std::string api_key_env = "FUZZORACLE_API_KEY";
  std::string completion_path = "/v1/chat/completions";
  int timeout_seconds = 120;
};

// Chat-completion client. The prompt travels as a single user message;
// the reply is choices[0].message.content.
class HttpBackend : public GenerationBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty())
      throw ConfigError("http backend: base_url is empty");
  }

  std::string Complete(const std::string &prompt) override {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (const char *key = std::getenv(config_.api_key_env.c_str()))
      headers.emplace("Authorization", std::string("Bearer ") + key);
    nlohmann::json body = {
        {"model", config_.model},
        {"temperature", config_.temperature},
        {"messages",
         nlohmann::json::array(
             {nlohmann::json{{"role", "user"}, {"content", prompt}}})}};
    auto res = client.Post(config_.completion_path, headers, body.dump(),
                           "application/json");
    if (!res)
      throw BackendUnavailable("http backend: no response from " +
                               config_.base_url);
    if (res->status != 200)
      throw BackendUnavailable("http backend: status " +
                               std::to_string(res->status) + ": " + res->body);
    auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") ||
        reply["choices"].empty() ||
        !reply["choices"][0].contains("message") ||
        !reply["choices"][0]["message"].contains("content"))
      throw BackendUnavailable("http backend: malformed completion reply");
    return reply["choices"][0]["message"]["content"].get<std::string>();
  }

  std::string Name() const override {
    return "http:" + config_.base_url + " model=" + config_.model;
  }

 private:
  HttpBackendConfig config_;
};

// Obtains one driver candidate from the backend for the given prompt.
// The raw completion is surfaced through `raw_reply_out` so the caller can
// persist it in the session work directory. Throws EmptyCompletion when the
// backend answers with blank text (a failed attempt, not a dead backend).
inline DriverCandidate GenerateDriver(const Prompt &prompt,
                                      GenerationBackend &backend,
                                      std::string *raw_reply_out = nullptr) {
  const std::string reply = backend.Complete(prompt.rendered_text);
  if (raw_reply_out != nullptr) *raw_reply_out = reply;
  if (Trim(reply).empty())
    throw EmptyCompletion("backend returned an empty completion");
  DriverCandidate cand;
  cand.source_text = ExtractCodeBlock(reply);
  cand.provenance = Provenance::kLlm;
  cand.attempt = prompt.attempt;
  cand.target_function = prompt.target_function;
  return cand;
}

}  // namespace fuzzoracle

#endif  // FUZZORACLE_BACKEND_H_
