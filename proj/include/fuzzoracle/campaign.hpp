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
// Fuzz campaign: drives an in-process fuzzing engine under a wall-clock
// budget, collects crash artifacts with their sanitizer reports, dedupes by
// normalized stack frames, classifies crashes to CWEs, and confirms (or
// fails to confirm) the oracle's prediction.

#ifndef FUZZORACLE_CAMPAIGN_H_
#define FUZZORACLE_CAMPAIGN_H_

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fuzzoracle/oracle.hpp"
#include "fuzzoracle/subprocess.hpp"
#include "fuzzoracle/util.hpp"

namespace fuzzoracle {

struct CampaignConfig {
  int time_budget_seconds = 300;
  int memory_limit_mb = 2048;
  std::optional<std::filesystem::path> seed_corpus_dir;
  std::string engine_command =
      "{binary} {corpus_dir} -max_total_time={max_time} "
      "-rss_limit_mb={rss_limit} -max_len={max_len} -artifact_prefix=./ "
      "-print_final_stats=1";
  int max_input_len = 0;  // 0: the pipeline imposes no cap
  int crash_cap = 10;
  int grace_seconds = 10;
  std::string symbolizer_path = "/usr/bin/addr2line";

  void Validate() const {
    if (time_budget_seconds < 1)
      throw ConfigError("time_budget_seconds must be >= 1");
    if (memory_limit_mb < 1) throw ConfigError("memory_limit_mb must be >= 1");
    if (crash_cap < 1) throw ConfigError("crash_cap must be >= 1");
    if (max_input_len < 0) throw ConfigError("max_input_len must be >= 0");
  }
};

enum class CrashKind {
  kDoubleFree,
  kUseAfterFree,
  kHeapBufferOverflow,
  kStackBufferOverflow,
  kNullDeref,
  kMemoryLeak,
  kUbsan,
  kUnknown
};

inline const char *CrashKindName(CrashKind k) {
  switch (k) {
    case CrashKind::kDoubleFree: return "double_free";
    case CrashKind::kUseAfterFree: return "use_after_free";
    case CrashKind::kHeapBufferOverflow: return "heap_buffer_overflow";
    case CrashKind::kStackBufferOverflow: return "stack_buffer_overflow";
    case CrashKind::kNullDeref: return "null_deref";
    case CrashKind::kMemoryLeak: return "memory_leak";
    case CrashKind::kUbsan: return "ubsan";
    case CrashKind::kUnknown: return "unknown";
  }
  return "unknown";
}

inline CrashKind CrashKindFromName(const std::string &name) {
  if (name == "double_free") return CrashKind::kDoubleFree;
  if (name == "use_after_free") return CrashKind::kUseAfterFree;
  if (name == "heap_buffer_overflow") return CrashKind::kHeapBufferOverflow;
  if (name == "stack_buffer_overflow") return CrashKind::kStackBufferOverflow;
  if (name == "null_deref") return CrashKind::kNullDeref;
  if (name == "memory_leak") return CrashKind::kMemoryLeak;
  if (name == "ubsan") return CrashKind::kUbsan;
  return CrashKind::kUnknown;
}

struct CrashRecord {
  std::string input_bytes;
  std::string input_file;  // artifact path relative to the crashes dir
  std::string sanitizer_report;
  std::string dedupe_key;
  std::optional<std::string> classified_cwe;
  CrashKind crash_kind = CrashKind::kUnknown;
};

enum class CampaignStatus { kCrashFound, kBudgetExhaustedNoCrash, kEngineError };

inline const char *CampaignStatusName(CampaignStatus s) {
  switch (s) {
    case CampaignStatus::kCrashFound: return "crash_found";
    case CampaignStatus::kBudgetExhaustedNoCrash:
      return "budget_exhausted_no_crash";
    case CampaignStatus::kEngineError: return "engine_error";
  }
  return "engine_error";
}

struct CampaignResult {
  std::string target_function;
  std::vector<CrashRecord> crashes;  // deduplicated
  double final_coverage_fraction = 0.0;
  long long executions = 0;
  CampaignStatus status = CampaignStatus::kBudgetExhaustedNoCrash;
  double duration_seconds = 0.0;
  std::string engine_diagnostics;  // set on engine_error
};

enum class ConfirmationOutcome {
  kConfirmedMatchingCwe,
  kConfirmedOtherCrash,
  kUnconfirmed
};

inline const char *ConfirmationOutcomeName(ConfirmationOutcome o) {
  switch (o) {
    case ConfirmationOutcome::kConfirmedMatchingCwe:
      return "confirmed_matching_cwe";
    case ConfirmationOutcome::kConfirmedOtherCrash:
      return "confirmed_other_crash";
    case ConfirmationOutcome::kUnconfirmed: return "unconfirmed";
  }
  return "unconfirmed";
}

struct Confirmation {
  std::string target_function;
  ConfirmationOutcome outcome = ConfirmationOutcome::kUnconfirmed;
  std::optional<std::string> matched_cwe;
  // An unconfirmed outcome never asserts the function is safe.
  std::string note;
};

// --- Crash classification ----------------------------------------------------

// Locates the sanitizer's error line: the first line containing "ERROR:",
// else the first "runtime error:" line, else the first non-empty line.
inline std::string ErrorLineOf(const std::string &report) {
  const auto lines = SplitLines(report);
  for (const auto &line : lines)
    if (line.find("ERROR:") != std::string::npos) return line;
  for (const auto &line : lines)
    if (line.find("runtime error:") != std::string::npos) return line;
  for (const auto &line : lines)
    if (!Trim(line).empty()) return line;
  return "";
}

// Ordered rule table mapping the error line to (kind, CWE). Total: every
// input classifies, unrecognized reports land on (unknown, none).
inline std::pair<CrashKind, std::optional<std::string>> ClassifyCrash(
    const std::string &sanitizer_report) {
  const std::string line = ErrorLineOf(sanitizer_report);
  auto has = [&line](const char *needle) {
    return line.find(needle) != std::string::npos;
  };
  if (has("attempting double-free"))
    return {CrashKind::kDoubleFree, "CWE-415"};
  if (has("heap-use-after-free")) return {CrashKind::kUseAfterFree, "CWE-416"};
  if (has("heap-buffer-overflow"))
    return {CrashKind::kHeapBufferOverflow, "CWE-787"};
  if (has("stack-buffer-overflow"))
    return {CrashKind::kStackBufferOverflow, "CWE-787"};
  if (has("SEGV on unknown address 0x000000000000") || has("null pointer"))
    return {CrashKind::kNullDeref, "CWE-476"};
  if (has("LeakSanitizer")) return {CrashKind::kMemoryLeak, "CWE-401"};
  if (has("runtime error:")) {
    if (has("overflow")) return {CrashKind::kUbsan, "CWE-190"};
    return {CrashKind::kUbsan, std::nullopt};
  }
  return {CrashKind::kUnknown, std::nullopt};
}

// --- Crash deduplication --------------------------------------------------------

namespace campaign_detail {

inline std::string StripAddresses(const std::string &s) {
  std::string out;
  size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && s[i] == '0' && s[i + 1] == 'x') {
      out += "0x?";
      i += 2;
      while (i < s.size() && std::isxdigit(static_cast<unsigned char>(s[i])))
        i++;
      continue;
    }
    // "==12345==" process markers vary across engine restarts.
    if (i + 1 < s.size() && s[i] == '=' && s[i + 1] == '=') {
      size_t j = i + 2;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])))
        j++;
      if (j > i + 2 && j + 1 < s.size() && s[j] == '=' && s[j + 1] == '=') {
        out += "==?==";
        i = j + 2;
        continue;
      }
    }
    out += s[i++];
  }
  return out;
}

// Normalizes one stack-frame line to "symbol@file" with addresses,
// offsets, line numbers and directories removed.
inline std::string NormalizeFrame(const std::string &frame) {
  const size_t in_pos = frame.find(" in ");
  if (in_pos != std::string::npos) {
    std::string rest = Trim(frame.substr(in_pos + 4));
    // The location, when present, is the last whitespace-separated token
    // and carries ':' (file:line) or '?' markers.
    const size_t last_space = rest.rfind(' ');
    std::string symbol = rest, location;
    if (last_space != std::string::npos) {
      const std::string tail = rest.substr(last_space + 1);
      if (tail.find(':') != std::string::npos ||
          tail.find('/') != std::string::npos || tail == "??" ||
          tail.find(".c") != std::string::npos) {
        symbol = Trim(rest.substr(0, last_space));
        location = tail;
      }
    }
    std::string base;
    if (!location.empty()) {
      const size_t colon = location.find(':');
      base = std::filesystem::path(location.substr(0, colon)).filename().string();
    }
    if (base.empty() || base == "??") return symbol;
    return symbol + "@" + base;
  }
  // Unsymbolized frame: "(module+0xoffset)" keeps only the module name.
  const size_t open = frame.find('(');
  if (open != std::string::npos) {
    std::string inside = frame.substr(open + 1);
    const size_t plus = inside.find_first_of("+)");
    inside = inside.substr(0, plus);
    return std::filesystem::path(inside).filename().string();
  }
  return StripAddresses(Trim(frame));
}

}  // namespace campaign_detail

// Derives the dedupe key: top three frames of the first stack trace after
// the error line, normalized. Reports with no stack fall back to the
// address-stripped error line, so the key is always report-determined.
inline std::string DedupeKeyOf(const std::string &sanitizer_report) {
  const auto lines = SplitLines(sanitizer_report);
  std::vector<std::string> frames;
  bool in_stack = false;
  for (const auto &line : lines) {
    const std::string t = Trim(line);
    const bool is_frame = t.size() > 1 && t[0] == '#' &&
                          std::isdigit(static_cast<unsigned char>(t[1]));
    if (is_frame) {
      if (!in_stack && t[1] != '0') continue;  // stacks start at frame #0
      in_stack = true;
      frames.push_back(campaign_detail::NormalizeFrame(t));
      if (frames.size() == 3) break;
    } else if (in_stack) {
      break;  // first stack only
    }
  }
  if (frames.empty())
    return campaign_detail::StripAddresses(ErrorLineOf(sanitizer_report));
  std::string key;
  for (size_t i = 0; i < frames.size(); i++) {
    if (i) key += " | ";
    key += frames[i];
  }
  return key;
}

// Keeps the first record per distinct dedupe key, preserving order.
inline std::vector<CrashRecord> DedupeCrashes(
    const std::vector<CrashRecord> &crashes) {
  std::vector<CrashRecord> out;
  std::set<std::string> seen;
  for (const auto &c : crashes)
    if (seen.insert(c.dedupe_key).second) out.push_back(c);
  return out;
}

// --- Campaign execution -----------------------------------------------------------

// Slices the sanitizer report out of the engine's stderr: from the error
// line through the SUMMARY line (inclusive), else through the end.
inline std::string SliceSanitizerReport(const std::string &stderr_text) {
  const auto lines = SplitLines(stderr_text);
  size_t begin = lines.size();
  for (size_t i = 0; i < lines.size(); i++) {
    if (lines[i].find("ERROR:") != std::string::npos ||
        lines[i].find("runtime error:") != std::string::npos) {
      begin = i;
      break;
    }
  }
  if (begin == lines.size()) return "";
  std::string out;
  for (size_t i = begin; i < lines.size(); i++) {
    out += lines[i];
    out += '\n';
    if (lines[i].rfind("SUMMARY:", 0) == 0) break;
  }
  return out;
}

using CoverageProbe =
    std::function<double(const std::vector<std::filesystem::path> &corpus)>;

// Runs the engine under the wall-clock budget, restarting after each crash
// up to the crash cap. The optional probe computes final corpus coverage;
// campaigns run without one report 0.
inline CampaignResult RunCampaign(const std::filesystem::path &harness,
                                  const CampaignConfig &config,
                                  const std::filesystem::path &workdir,
                                  const std::string &target_function = "",
                                  const CoverageProbe &coverage_probe = nullptr) {
  config.Validate();
  CampaignResult result;
  result.target_function = target_function;

  const auto corpus_dir = workdir / "corpus";
  const auto crashes_dir = workdir / "crashes";
  std::filesystem::create_directories(corpus_dir);
  std::filesystem::create_directories(crashes_dir);
  if (config.seed_corpus_dir.has_value() &&
      std::filesystem::exists(*config.seed_corpus_dir)) {
    for (const auto &e :
         std::filesystem::directory_iterator(*config.seed_corpus_dir)) {
      std::error_code ec;
      std::filesystem::copy_file(e.path(), corpus_dir / e.path().filename(),
                                 std::filesystem::copy_options::skip_existing,
                                 ec);
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  const auto deadline = t0 + std::chrono::seconds(config.time_budget_seconds);
  bool engine_error = false;

  auto list_artifacts = [&workdir]() {
    std::set<std::filesystem::path> found;
    for (const auto &e : std::filesystem::directory_iterator(workdir)) {
      const std::string name = e.path().filename().string();
      if (name.rfind("crash-", 0) == 0 || name.rfind("leak-", 0) == 0 ||
          name.rfind("oom-", 0) == 0 || name.rfind("timeout-", 0) == 0)
        found.insert(e.path());
    }
    return found;
  };

  std::set<std::filesystem::path> known_artifacts = list_artifacts();

  while (static_cast<int>(result.crashes.size()) < config.crash_cap) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) break;
    const int remaining = static_cast<int>(
        std::chrono::duration_cast<std::chrono::seconds>(deadline - now)
            .count());
    const int run_budget = std::max(1, remaining);

    std::map<std::string, std::vector<std::string>> vars;
    vars["binary"] = {harness.string()};
    vars["corpus_dir"] = {corpus_dir.string()};
    vars["max_time"] = {std::to_string(run_budget)};
    vars["rss_limit"] = {std::to_string(config.memory_limit_mb)};
    vars["max_len"] = {std::to_string(config.max_input_len)};

    CommandSpec spec;
    spec.argv = SubstituteCommandTemplate(config.engine_command, vars);
    spec.cwd = workdir;
    spec.timeout_seconds = run_budget + config.grace_seconds;
    spec.env = {{"GCOV_PREFIX", (workdir / "gcov-scratch").string()},
                {"GCOV_PREFIX_STRIP", "999"}};
    if (std::filesystem::exists(config.symbolizer_path))
      spec.env.emplace_back(
          "ASAN_OPTIONS",
          "external_symbolizer_path=" + config.symbolizer_path);

    CommandResult run = RunCommand(spec);

    const std::string stat_prefix = "stat::number_of_executed_units:";
    for (const auto &line : SplitLines(run.std_err)) {
      const std::string t = Trim(line);
      if (t.rfind(stat_prefix, 0) == 0) {
        try {
          result.executions += std::stoll(t.substr(stat_prefix.size()));
        } catch (...) {
        }
      }
    }

    if (run.spawn_failed) {
      engine_error = true;
      result.engine_diagnostics = "engine binary could not be spawned: " +
                                  (spec.argv.empty() ? "" : spec.argv[0]);
      break;
    }
    if (run.timed_out) break;  // budget guard fired; keep what we have
    if (run.ok()) break;       // budget exhausted cleanly

    // Abnormal exit: a crash if the engine left a new artifact.
    auto after = list_artifacts();
    std::vector<std::filesystem::path> fresh;
    for (const auto &p : after)
      if (!known_artifacts.count(p)) fresh.push_back(p);
    known_artifacts = std::move(after);

    if (fresh.empty()) {
      engine_error = true;
      result.engine_diagnostics = run.std_err;
      break;
    }
    for (const auto &artifact : fresh) {
      CrashRecord rec;
      rec.input_bytes = ReadFile(artifact);
      rec.sanitizer_report = SliceSanitizerReport(run.std_err);
      if (rec.sanitizer_report.empty()) rec.sanitizer_report = run.std_err;
      rec.dedupe_key = DedupeKeyOf(rec.sanitizer_report);
      auto [kind, cwe] = ClassifyCrash(rec.sanitizer_report);
      rec.crash_kind = kind;
      rec.classified_cwe = cwe;
      const auto stored = crashes_dir / artifact.filename();
      std::error_code ec;
      std::filesystem::rename(artifact, stored, ec);
      if (ec) std::filesystem::copy_file(
          artifact, stored, std::filesystem::copy_options::overwrite_existing,
          ec);
      rec.input_file = stored.filename().string();
      result.crashes.push_back(std::move(rec));
      if (static_cast<int>(result.crashes.size()) >= config.crash_cap) break;
    }
  }

  result.crashes = DedupeCrashes(result.crashes);
  result.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (engine_error && result.crashes.empty()) {
    result.status = CampaignStatus::kEngineError;
  } else if (!result.crashes.empty()) {
    result.status = CampaignStatus::kCrashFound;
  } else {
    result.status = CampaignStatus::kBudgetExhaustedNoCrash;
  }

  if (coverage_probe) {
    std::vector<std::filesystem::path> corpus;
    for (const auto &e : std::filesystem::directory_iterator(corpus_dir))
      if (e.is_regular_file()) corpus.push_back(e.path());
    std::sort(corpus.begin(), corpus.end());
    result.final_coverage_fraction = coverage_probe(corpus);
  }
  return result;
}

// --- Confirmation -------------------------------------------------------------------

// Matches deduplicated crashes against the oracle's prediction. A crash
// with the predicted CWE confirms it; any other crash still evidences a
// bug; no crash never asserts safety.
inline Confirmation ConfirmVerdict(const OracleVerdict &verdict,
                                   const CampaignResult &result) {
  Confirmation conf;
  conf.target_function = verdict.function_name;
  for (const auto &crash : result.crashes) {
    if (!crash.classified_cwe.has_value()) continue;
    if (std::find(verdict.predicted_cwes.begin(), verdict.predicted_cwes.end(),
                  *crash.classified_cwe) != verdict.predicted_cwes.end()) {
      conf.outcome = ConfirmationOutcome::kConfirmedMatchingCwe;
      conf.matched_cwe = *crash.classified_cwe;
      return conf;
    }
  }
  if (!result.crashes.empty()) {
    conf.outcome = ConfirmationOutcome::kConfirmedOtherCrash;
    return conf;
  }
  conf.outcome = ConfirmationOutcome::kUnconfirmed;
  conf.note =
      "no crash within budget; this does not rule out a vulnerability";
  return conf;
}

// --- Serialization -------------------------------------------------------------------

inline nlohmann::ordered_json CrashRecordToJson(const CrashRecord &c) {
  return nlohmann::ordered_json{
      {"input_file", c.input_file},
      {"dedupe_key", c.dedupe_key},
      {"crash_kind", CrashKindName(c.crash_kind)},
      {"classified_cwe", c.classified_cwe.has_value()
                             ? nlohmann::ordered_json(*c.classified_cwe)
                             : nlohmann::ordered_json(nullptr)},
      {"sanitizer_report", c.sanitizer_report}};
}

inline CrashRecord CrashRecordFromJson(const nlohmann::json &j) {
  CrashRecord c;
  c.input_file = j.value("input_file", "");
  c.dedupe_key = j.value("dedupe_key", "");
  c.crash_kind = CrashKindFromName(j.value("crash_kind", "unknown"));
  if (j.contains("classified_cwe") && !j["classified_cwe"].is_null())
    c.classified_cwe = j["classified_cwe"].get<std::string>();
  c.sanitizer_report = j.value("sanitizer_report", "");
  return c;
}

inline nlohmann::ordered_json CampaignResultToJson(const CampaignResult &r) {
  nlohmann::ordered_json crashes = nlohmann::ordered_json::array();
  for (const auto &c : r.crashes) crashes.push_back(CrashRecordToJson(c));
  return nlohmann::ordered_json{
      {"target_function", r.target_function},
      {"status", CampaignStatusName(r.status)},
      {"crashes", crashes},
      {"final_coverage_fraction", r.final_coverage_fraction},
      {"executions", r.executions},
      {"duration_seconds", r.duration_seconds},
      {"engine_diagnostics", r.engine_diagnostics}};
}

inline CampaignResult CampaignResultFromJson(const nlohmann::json &j) {
  CampaignResult r;
  r.target_function = j.value("target_function", "");
  const std::string status = j.value("status", "engine_error");
  if (status == "crash_found") r.status = CampaignStatus::kCrashFound;
  else if (status == "budget_exhausted_no_crash")
    r.status = CampaignStatus::kBudgetExhaustedNoCrash;
  else r.status = CampaignStatus::kEngineError;
  if (j.contains("crashes"))
    for (const auto &c : j["crashes"]) r.crashes.push_back(CrashRecordFromJson(c));
  r.final_coverage_fraction = j.value("final_coverage_fraction", 0.0);
  r.executions = j.value("executions", 0LL);
  r.duration_seconds = j.value("duration_seconds", 0.0);
  r.engine_diagnostics = j.value("engine_diagnostics", "");
  return r;
}

inline nlohmann::ordered_json ConfirmationToJson(const Confirmation &c) {
  return nlohmann::ordered_json{
      {"target_function", c.target_function},
      {"outcome", ConfirmationOutcomeName(c.outcome)},
      {"matched_cwe", c.matched_cwe.has_value()
                          ? nlohmann::ordered_json(*c.matched_cwe)
                          : nlohmann::ordered_json(nullptr)},
      {"note", c.note}};
}

inline Confirmation ConfirmationFromJson(const nlohmann::json &j) {
  Confirmation c;
  c.target_function = j.value("target_function", "");
  const std::string outcome = j.value("outcome", "unconfirmed");
  if (outcome == "confirmed_matching_cwe")
    c.outcome = ConfirmationOutcome::kConfirmedMatchingCwe;
  else if (outcome == "confirmed_other_crash")
    c.outcome = ConfirmationOutcome::kConfirmedOtherCrash;
  else c.outcome = ConfirmationOutcome::kUnconfirmed;
  if (j.contains("matched_cwe") && !j["matched_cwe"].is_null())
    c.matched_cwe = j["matched_cwe"].get<std::string>();
  c.note = j.value("note", "");
  return c;
}

}  // namespace fuzzoracle

#endif  // FUZZORACLE_CAMPAIGN_H_
