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
// Pipeline configuration: one structured document (YAML or JSON) covering
// every stage, with an effective-config snapshot that makes runs
// reproducible in replay mode.

#ifndef FUZZORACLE_CONFIG_H_
#define FUZZORACLE_CONFIG_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fuzzoracle/backend.hpp"
#include "fuzzoracle/campaign.hpp"
#include "fuzzoracle/gate.hpp"
#include "fuzzoracle/oracle.hpp"
#include "fuzzoracle/util.hpp"
#include "fuzzoracle/yamljson.hpp"

namespace fuzzoracle {

enum class BackendMode { kTemplate, kReplay, kHttp };

inline const char *BackendModeName(BackendMode m) {
  switch (m) {
    case BackendMode::kTemplate: return "template";
    case BackendMode::kReplay: return "replay";
    case BackendMode::kHttp: return "http";
  }
  return "template";
}

struct ProjectConfig {
  std::string name;
  std::vector<std::filesystem::path> source_dirs;
  std::string library_archive;
  std::vector<std::filesystem::path> include_dirs;
  std::vector<std::string> exclusion_list;
  std::vector<std::filesystem::path> signature_specs;
};

struct SynthesisConfig {
  std::optional<std::filesystem::path> template_path;
  BackendMode backend_mode = BackendMode::kTemplate;
  HttpBackendConfig http;
  std::optional<std::filesystem::path> replay_dir;
  int max_attempts = 5;
};

struct PipelineConfig {
  ProjectConfig project;
  OracleConfig oracle;
  SynthesisConfig synthesis;
  BuildConfig gate;
  CampaignConfig campaign;
  std::filesystem::path workdir = "workdir";

  void Validate() {
    oracle.Validate();
    gate.Validate();
    campaign.Validate();
    if (synthesis.max_attempts < 1)
      throw ConfigError("synthesis.max_attempts must be >= 1");
    if (synthesis.backend_mode == BackendMode::kReplay &&
        !synthesis.replay_dir.has_value())
      throw ConfigError("replay backend requires synthesis.replay_dir");
    if (synthesis.backend_mode == BackendMode::kHttp &&
        synthesis.http.base_url.empty())
      throw ConfigError("http backend requires synthesis.base_url");
  }
};

namespace config_detail {

inline std::vector<std::string> StringList(const nlohmann::json &j,
                                           const std::string &key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array()) throw ConfigError(key + " must be a list");
  for (const auto &v : j[key]) out.push_back(v.get<std::string>());
  return out;
}

inline std::vector<std::filesystem::path> PathList(const nlohmann::json &j,
                                                   const std::string &key) {
  std::vector<std::filesystem::path> out;
  for (const auto &s : StringList(j, key)) out.emplace_back(s);
  return out;
}

}  // namespace config_detail

// Stage subprocesses run with their own working directories, so every
// configured path must survive a chdir.
inline void AbsolutizePaths(PipelineConfig &c) {
  auto abs = [](std::filesystem::path &p) {
    if (!p.empty()) p = std::filesystem::absolute(p);
  };
  for (auto &d : c.project.source_dirs) abs(d);
  for (auto &d : c.project.include_dirs) abs(d);
  for (auto &s : c.project.signature_specs) abs(s);
  if (!c.project.library_archive.empty())
    c.project.library_archive =
        std::filesystem::absolute(c.project.library_archive).string();
  for (auto &a : c.gate.library_archives)
    a = std::filesystem::absolute(a).string();
  abs(c.gate.library_build_dir);
  for (auto &d : c.gate.include_dirs) abs(d);
  if (c.synthesis.template_path.has_value()) abs(*c.synthesis.template_path);
  if (c.synthesis.replay_dir.has_value()) abs(*c.synthesis.replay_dir);
  if (c.campaign.seed_corpus_dir.has_value()) abs(*c.campaign.seed_corpus_dir);
  abs(c.workdir);
}

inline PipelineConfig PipelineConfigFromJson(const nlohmann::json &doc) {
  using config_detail::PathList;
  using config_detail::StringList;
  if (!doc.is_object()) throw ConfigError("config document is not a mapping");
  PipelineConfig c;

  if (doc.contains("project")) {
    const auto &p = doc["project"];
    c.project.name = p.value("name", "");
    c.project.source_dirs = PathList(p, "source_dirs");
    c.project.library_archive = p.value("library_archive", "");
    c.project.include_dirs = PathList(p, "include_dirs");
    c.project.exclusion_list = StringList(p, "exclusion_list");
    c.project.signature_specs = PathList(p, "signature_specs");
  }

  if (doc.contains("oracle")) {
    const auto &o = doc["oracle"];
    c.oracle.h1_complexity_threshold =
        o.value("h1_complexity_threshold", c.oracle.h1_complexity_threshold);
    if (o.contains("h1_name_substrings"))
      c.oracle.h1_name_substrings = StringList(o, "h1_name_substrings");
    if (o.contains("weights")) {
      const auto &w = o["weights"];
      if (!w.is_array() || w.size() != 3)
        throw ConfigError("oracle.weights must be a list of three numbers");
      c.oracle.w1 = w[0].get<double>();
      c.oracle.w2 = w[1].get<double>();
      c.oracle.w3 = w[2].get<double>();
    }
    c.oracle.top_k = o.value("top_k", c.oracle.top_k);
    if (o.contains("external_oracle_command") &&
        !o["external_oracle_command"].is_null())
      c.oracle.external_oracle_command =
          o["external_oracle_command"].get<std::string>();
    c.oracle.external_oracle_timeout_seconds =
        o.value("external_oracle_timeout_seconds",
                c.oracle.external_oracle_timeout_seconds);
    if (o.contains("typedef_aliases")) {
      c.oracle.typedef_aliases.clear();
      for (const auto &[k, v] : o["typedef_aliases"].items())
        c.oracle.typedef_aliases[k] = v.get<std::string>();
    }
  }

  if (doc.contains("synthesis")) {
    const auto &s = doc["synthesis"];
    if (s.contains("template_path") && !s["template_path"].is_null())
      c.synthesis.template_path = s["template_path"].get<std::string>();
    const std::string mode = s.value("backend", "template");
    if (mode == "template") c.synthesis.backend_mode = BackendMode::kTemplate;
    else if (mode == "replay") c.synthesis.backend_mode = BackendMode::kReplay;
    else if (mode == "http") c.synthesis.backend_mode = BackendMode::kHttp;
    else throw ConfigError("synthesis.backend must be template|replay|http");
    c.synthesis.http.base_url = s.value("base_url", "");
    c.synthesis.http.model = s.value("model", c.synthesis.http.model);
    c.synthesis.http.temperature =
        s.value("temperature", c.synthesis.http.temperature);
    c.synthesis.http.api_key_env =
        s.value("api_key_env", c.synthesis.http.api_key_env);
    if (s.contains("replay_dir") && !s["replay_dir"].is_null())
      c.synthesis.replay_dir = s["replay_dir"].get<std::string>();
    c.synthesis.max_attempts = s.value("max_attempts", c.synthesis.max_attempts);
  }

  if (doc.contains("gate")) {
    const auto &g = doc["gate"];
    c.gate.compiler_command = g.value("compiler_command", c.gate.compiler_command);
    if (g.contains("sanitizers")) {
      c.gate.sanitizers.clear();
      for (const auto &s : StringList(g, "sanitizers")) {
        if (s == "address") c.gate.sanitizers.insert(Sanitizer::kAddress);
        else if (s == "undefined") c.gate.sanitizers.insert(Sanitizer::kUndefined);
        else if (s == "leak") c.gate.sanitizers.insert(Sanitizer::kLeak);
        else throw ConfigError("unknown sanitizer: " + s);
      }
    }
    c.gate.coverage_instrumentation =
        g.value("coverage_instrumentation", c.gate.coverage_instrumentation);
    c.gate.timeout_seconds = g.value("timeout_seconds", c.gate.timeout_seconds);
    c.gate.coverage_threshold =
        g.value("coverage_threshold", c.gate.coverage_threshold);
    c.gate.gcov_command = g.value("gcov_command", c.gate.gcov_command);
  }

  if (doc.contains("campaign")) {
    const auto &f = doc["campaign"];
    c.campaign.time_budget_seconds =
        f.value("time_budget_seconds", c.campaign.time_budget_seconds);
    c.campaign.memory_limit_mb =
        f.value("memory_limit_mb", c.campaign.memory_limit_mb);
    if (f.contains("seed_corpus_dir") && !f["seed_corpus_dir"].is_null())
      c.campaign.seed_corpus_dir = f["seed_corpus_dir"].get<std::string>();
    c.campaign.engine_command =
        f.value("engine_command", c.campaign.engine_command);
    c.campaign.max_input_len = f.value("max_input_len", c.campaign.max_input_len);
    c.campaign.crash_cap = f.value("crash_cap", c.campaign.crash_cap);
    c.campaign.grace_seconds = f.value("grace_seconds", c.campaign.grace_seconds);
    c.campaign.symbolizer_path =
        f.value("symbolizer_path", c.campaign.symbolizer_path);
  }

  if (doc.contains("workdir")) c.workdir = doc["workdir"].get<std::string>();

  // Library wiring: the archive is both the link input and the home of the
  // coverage notes files.
  if (!c.project.library_archive.empty()) {
    c.gate.library_archives = {c.project.library_archive};
    c.gate.library_build_dir =
        std::filesystem::path(c.project.library_archive).parent_path();
  }
  c.gate.include_dirs = c.project.include_dirs;

  AbsolutizePaths(c);
  c.Validate();
  return c;
}

inline PipelineConfig LoadPipelineConfigFile(const std::filesystem::path &path) {
  if (!std::filesystem::exists(path))
    throw ConfigError("config file not found: " + path.string());
  return PipelineConfigFromJson(
      ParseStructuredDocument(ReadFile(path), PathLooksYaml(path)));
}

// Effective-config snapshot: every field explicit, defaults included.
inline nlohmann::ordered_json PipelineConfigToJson(const PipelineConfig &c) {
  auto paths = [](const std::vector<std::filesystem::path> &v) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto &p : v) arr.push_back(p.string());
    return arr;
  };
  nlohmann::ordered_json sans = nlohmann::ordered_json::array();
  if (c.gate.sanitizers.count(Sanitizer::kAddress)) sans.push_back("address");
  if (c.gate.sanitizers.count(Sanitizer::kUndefined)) sans.push_back("undefined");
  if (c.gate.sanitizers.count(Sanitizer::kLeak)) sans.push_back("leak");
  nlohmann::ordered_json aliases = nlohmann::ordered_json::object();
  for (const auto &[k, v] : c.oracle.typedef_aliases) aliases[k] = v;
  return nlohmann::ordered_json{
      {"project",
       {{"name", c.project.name},
        {"source_dirs", paths(c.project.source_dirs)},
        {"library_archive", c.project.library_archive},
        {"include_dirs", paths(c.project.include_dirs)},
        {"exclusion_list", c.project.exclusion_list},
        {"signature_specs", paths(c.project.signature_specs)}}},
      {"oracle",
       {{"h1_complexity_threshold", c.oracle.h1_complexity_threshold},
        {"h1_name_substrings", c.oracle.h1_name_substrings},
        {"weights", {c.oracle.w1, c.oracle.w2, c.oracle.w3}},
        {"top_k", c.oracle.top_k},
        {"external_oracle_command",
         c.oracle.external_oracle_command.has_value()
             ? nlohmann::ordered_json(*c.oracle.external_oracle_command)
             : nlohmann::ordered_json(nullptr)},
        {"external_oracle_timeout_seconds",
         c.oracle.external_oracle_timeout_seconds},
        {"typedef_aliases", aliases}}},
      {"synthesis",
       {{"template_path", c.synthesis.template_path.has_value()
                              ? nlohmann::ordered_json(
                                    c.synthesis.template_path->string())
                              : nlohmann::ordered_json(nullptr)},
        {"backend", BackendModeName(c.synthesis.backend_mode)},
        {"base_url", c.synthesis.http.base_url},
        {"model", c.synthesis.http.model},
        {"temperature", c.synthesis.http.temperature},
        {"api_key_env", c.synthesis.http.api_key_env},
        {"replay_dir", c.synthesis.replay_dir.has_value()
                           ? nlohmann::ordered_json(
                                 c.synthesis.replay_dir->string())
                           : nlohmann::ordered_json(nullptr)},
        {"max_attempts", c.synthesis.max_attempts}}},
      {"gate",
       {{"compiler_command", c.gate.compiler_command},
        {"sanitizers", sans},
        {"coverage_instrumentation", c.gate.coverage_instrumentation},
        {"timeout_seconds", c.gate.timeout_seconds},
        {"coverage_threshold", c.gate.coverage_threshold},
        {"gcov_command", c.gate.gcov_command}}},
      {"campaign",
       {{"time_budget_seconds", c.campaign.time_budget_seconds},
        {"memory_limit_mb", c.campaign.memory_limit_mb},
        {"seed_corpus_dir", c.campaign.seed_corpus_dir.has_value()
                                ? nlohmann::ordered_json(
                                      c.campaign.seed_corpus_dir->string())
                                : nlohmann::ordered_json(nullptr)},
        {"engine_command", c.campaign.engine_command},
        {"max_input_len", c.campaign.max_input_len},
        {"crash_cap", c.campaign.crash_cap},
        {"grace_seconds", c.campaign.grace_seconds},
        {"symbolizer_path", c.campaign.symbolizer_path}}},
      {"workdir", c.workdir.string()}};
}

}  // namespace fuzzoracle

#endif  // FUZZORACLE_CONFIG_H_
