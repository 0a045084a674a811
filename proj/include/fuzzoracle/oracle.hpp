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
// Target oracle: flags likely-vulnerable functions via three heuristics
// (name+complexity, fuzz-interface shape, vulnerability score) and ranks
// them for driver generation. The score comes from a built-in lexical
// surrogate or from an external model process speaking line-delimited JSON.

#ifndef FUZZORACLE_ORACLE_H_
#define FUZZORACLE_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fuzzoracle/inventory.hpp"
#include "fuzzoracle/subprocess.hpp"
#include "fuzzoracle/util.hpp"

namespace fuzzoracle {

enum class VerdictSource { kBuiltinLexical, kExternal };

inline const char *VerdictSourceName(VerdictSource s) {
  return s == VerdictSource::kExternal ? "external" : "builtin_lexical";
}

struct OracleVerdict {
  std::string function_name;
  double score = 0.0;  // heuristic 3 score from whichever source produced it
  std::vector<std::string> predicted_cwes;
  bool heuristic1 = false;
  bool heuristic2 = false;
  double heuristic3_score = 0.0;
  VerdictSource source = VerdictSource::kBuiltinLexical;
};

struct OracleConfig {
  int h1_complexity_threshold = 10;
  std::vector<std::string> h1_name_substrings = {"parse"};
  double w1 = 0.2, w2 = 0.2, w3 = 0.6;
  int top_k = 5;
  std::optional<std::string> external_oracle_command;
  int external_oracle_timeout_seconds = 30;
  std::map<std::string, std::string> typedef_aliases = DefaultTypedefMap();

  void Validate() const {
    if (w1 < 0 || w2 < 0 || w3 < 0 || std::abs(w1 + w2 + w3 - 1.0) > 1e-9)
      throw ConfigError("oracle weights must be non-negative and sum to 1");
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (h1_complexity_threshold < 1)
      throw ConfigError("h1_complexity_threshold must be positive");
  }
};

struct TargetCandidate {
  FunctionRecord record;
  OracleVerdict verdict;
  int rank = 0;
  double composite_score = 0.0;
};

// --- Heuristic 1: complexity + name -----------------------------------------

inline bool Heuristic1(const FunctionRecord &record, const OracleConfig &config) {
  if (record.cyclomatic_complexity < config.h1_complexity_threshold)
    return false;
  for (const auto &needle : config.h1_name_substrings)
    if (ContainsCaseInsensitive(record.name, needle)) return true;
  return false;
}

// --- Heuristic 3 surrogate: lexical vulnerability score ----------------------

struct LexicalFeatures {
  int f_free = 0;            // argument expressions released more than once
  int f_unchecked_alloc = 0; // allocations dereferenced with no null check
  int f_copy = 0;            // unbounded-copy call sites
  int f_fmt = 0;             // format calls with a non-literal format
};

namespace oracle_detail {

inline const std::set<std::string> &Deallocators() {
  static const std::set<std::string> kSet = {"free", "gdFree"};
  return kSet;
}
inline const std::set<std::string> &Allocators() {
  static const std::set<std::string> kSet = {"malloc", "calloc", "realloc"};
  return kSet;
}
inline const std::set<std::string> &CopyCalls() {
  static const std::set<std::string> kSet = {"strcpy", "memcpy", "sprintf",
                                             "strcat"};
  return kSet;
}
// Format-string call -> index of the format argument.
inline const std::map<std::string, int> &FormatCalls() {
  static const std::map<std::string, int> kMap = {
      {"printf", 0},   {"fprintf", 1},  {"sprintf", 1},
      {"snprintf", 2}, {"vprintf", 0},  {"vfprintf", 1},
      {"vsprintf", 1}, {"vsnprintf", 2}, {"syslog", 1}};
  return kMap;
}

// Finds the matching ')' for the '(' at open_idx; tokens.size() if absent.
inline size_t MatchingParen(const std::vector<Token> &toks, size_t open_idx) {
  int depth = 0;
  for (size_t i = open_idx; i < toks.size(); i++) {
    if (toks[i].kind == TokKind::kPunct && toks[i].text == "(") depth++;
    if (toks[i].kind == TokKind::kPunct && toks[i].text == ")" && --depth == 0)
      return i;
  }
  return toks.size();
}

// Splits a call's argument tokens on top-level commas.
inline std::vector<std::pair<size_t, size_t>> SplitCallArgs(
    const std::vector<Token> &toks, size_t open_idx, size_t close_idx) {
  std::vector<std::pair<size_t, size_t>> out;
  size_t begin = open_idx + 1;
  int depth = 0;
  for (size_t i = open_idx + 1; i < close_idx; i++) {
    const std::string &t = toks[i].text;
    if (toks[i].kind == TokKind::kPunct) {
      if (t == "(" || t == "[") depth++;
      if (t == ")" || t == "]") depth--;
      if (t == "," && depth == 0) {
        out.emplace_back(begin, i);
        begin = i + 1;
      }
    }
  }
  if (close_idx > begin) out.emplace_back(begin, close_idx);
  return out;
}

inline std::string JoinTokens(const std::vector<Token> &toks, size_t begin,
                              size_t end) {
  std::string out;
  for (size_t i = begin; i < end; i++) {
    if (!out.empty()) out += ' ';
    out += toks[i].text;
  }
  return out;
}

// True when the body contains a recognizable null check of `var`:
// `!var`, `var == NULL/0`, `NULL/0 == var`, `var != NULL/0`, `if (var)`.
inline bool HasNullCheck(const std::vector<Token> &toks, const std::string &var) {
  auto is_null = [](const Token &t) {
    return (t.kind == TokKind::kIdent && (t.text == "NULL" || t.text == "nullptr")) ||
           (t.kind == TokKind::kNumber && t.text == "0");
  };
  for (size_t i = 0; i < toks.size(); i++) {
    if (toks[i].kind != TokKind::kIdent || toks[i].text != var) continue;
    if (i > 0 && toks[i - 1].kind == TokKind::kPunct && toks[i - 1].text == "!")
      return true;
    if (i + 2 < toks.size() && toks[i + 1].kind == TokKind::kPunct &&
        (toks[i + 1].text == "==" || toks[i + 1].text == "!=") &&
        is_null(toks[i + 2]))
      return true;
    if (i >= 2 && toks[i - 1].kind == TokKind::kPunct &&
        (toks[i - 1].text == "==" || toks[i - 1].text == "!=") &&
        is_null(toks[i - 2]))
      return true;
    if (i >= 2 && i + 1 < toks.size() && toks[i - 1].text == "(" &&
        toks[i - 2].kind == TokKind::kIdent && toks[i - 2].text == "if" &&
        toks[i + 1].text == ")")
      return true;
  }
  return false;
}

// True when `var` is dereferenced anywhere: `*var`, `var[`, `var->`.
inline bool IsDereferenced(const std::vector<Token> &toks, const std::string &var) {
  for (size_t i = 0; i < toks.size(); i++) {
    if (toks[i].kind != TokKind::kIdent || toks[i].text != var) continue;
    if (i > 0 && toks[i - 1].kind == TokKind::kPunct && toks[i - 1].text == "*")
      return true;
    if (i + 1 < toks.size() && toks[i + 1].kind == TokKind::kPunct &&
        (toks[i + 1].text == "[" || toks[i + 1].text == "->"))
      return true;
  }
  return false;
}

}  // namespace oracle_detail

inline LexicalFeatures ExtractLexicalFeatures(const std::string &body) {
  using namespace oracle_detail;
  LexicalFeatures f;
  const auto toks = TokenizeC(body);

  std::map<std::string, int> freed_args;
  std::set<std::string> alloc_vars;

  for (size_t i = 0; i + 1 < toks.size(); i++) {
    if (toks[i].kind != TokKind::kIdent) continue;
    if (toks[i + 1].kind != TokKind::kPunct || toks[i + 1].text != "(") continue;
    const std::string &callee = toks[i].text;
    const size_t open = i + 1;
    const size_t close = MatchingParen(toks, open);
    if (close >= toks.size()) continue;

    if (Deallocators().count(callee)) {
      freed_args[JoinTokens(toks, open + 1, close)]++;
    }
    if (CopyCalls().count(callee)) f.f_copy++;
    auto fmt = FormatCalls().find(callee);
    if (fmt != FormatCalls().end()) {
      auto args = SplitCallArgs(toks, open, close);
      const int idx = fmt->second;
      if (static_cast<size_t>(idx) < args.size()) {
        const Token &first = toks[args[idx].first];
        if (first.kind != TokKind::kString) f.f_fmt++;
      }
    }
    if (Allocators().count(callee)) {
      // Walk back over an optional cast to the assigned variable:
      // `x = (T *)malloc(...)` or `x = malloc(...)`.
      size_t j = i;
      if (j > 0 && toks[j - 1].kind == TokKind::kPunct &&
          toks[j - 1].text == ")") {
        int depth = 0;
        size_t k = j - 1;
        while (true) {
          if (toks[k].kind == TokKind::kPunct && toks[k].text == ")") depth++;
          if (toks[k].kind == TokKind::kPunct && toks[k].text == "(" &&
              --depth == 0)
            break;
          if (k == 0) break;
          k--;
        }
        j = k;
      }
      if (j >= 2 && toks[j - 1].kind == TokKind::kPunct &&
          toks[j - 1].text == "=" && toks[j - 2].kind == TokKind::kIdent) {
        alloc_vars.insert(toks[j - 2].text);
      }
    }
  }

  for (const auto &[arg, count] : freed_args)
    if (count >= 2) f.f_free++;
  for (const auto &var : alloc_vars)
    if (IsDereferenced(toks, var) && !HasNullCheck(toks, var))
      f.f_unchecked_alloc++;
  return f;
}

// Deterministic surrogate for a learned per-function vulnerability score.
// Saturating form keeps the score in [0,1] and is monotone in each feature.
inline std::pair<double, std::vector<std::string>> LexicalVulnScore(
    const FunctionRecord &record) {
  const LexicalFeatures f = ExtractLexicalFeatures(record.body);
  const double x = (2.0 * f.f_free + 1.0 * f.f_unchecked_alloc +
                    1.0 * f.f_copy + 1.5 * f.f_fmt) /
                   4.0;
  const double score = 1.0 - std::exp(-x);
  std::vector<std::string> cwes;
  if (f.f_free >= 1) cwes.push_back("CWE-415");
  if (f.f_unchecked_alloc >= 1) cwes.push_back("CWE-476");
  if (f.f_copy >= 1) cwes.push_back("CWE-787");
  if (f.f_fmt >= 1) cwes.push_back("CWE-134");
  return {score, cwes};
}

// --- External oracle protocol -------------------------------------------------

// One request-response pair per record over the child's stdin/stdout.
// Throws OracleUnavailable (dead child / timeout) or OracleProtocolError
// (malformed or out-of-range reply).
inline std::pair<double, std::vector<std::string>> ExternalOracleQueryOn(
    LineProtocolProcess &proc, const FunctionRecord &record,
    int timeout_seconds) {
  if (!proc.Alive()) throw OracleUnavailable("oracle process has exited");
  nlohmann::json request = {
      {"function_name", record.name},
      {"body", record.body},
      {"params", nlohmann::json::array()}};
  for (const auto &p : record.params)
    request["params"].push_back({p.name, p.type});
  if (!proc.WriteLine(request.dump()))
    throw OracleUnavailable("oracle stdin closed");
  auto line = proc.ReadLine(timeout_seconds);
  if (!line.has_value()) {
    if (!proc.Alive()) throw OracleUnavailable("oracle exited mid-request");
    throw OracleUnavailable("oracle response timed out");
  }
  auto reply = nlohmann::json::parse(*line, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("score") ||
      !reply["score"].is_number())
    throw OracleProtocolError("malformed oracle reply: " + *line);
  const double score = reply["score"].get<double>();
  if (score < 0.0 || score > 1.0)
    throw OracleProtocolError("oracle score out of range: " + *line);
  std::vector<std::string> cwes;
  if (reply.contains("predicted_cwes")) {
    if (!reply["predicted_cwes"].is_array())
      throw OracleProtocolError("predicted_cwes is not a list");
    for (const auto &c : reply["predicted_cwes"])
      cwes.push_back(c.get<std::string>());
  }
  return {score, cwes};
}

inline OracleVerdict ExternalOracleQuery(LineProtocolProcess &proc,
                                         const FunctionRecord &record,
                                         const OracleConfig &config) {
  auto [score, cwes] =
      ExternalOracleQueryOn(proc, record, config.external_oracle_timeout_seconds);
  OracleVerdict v;
  v.function_name = record.name;
  v.score = score;
  v.heuristic3_score = score;
  v.predicted_cwes = std::move(cwes);
  v.heuristic1 = Heuristic1(record, config);
  v.heuristic2 = MatchFuzzInterfaceTypes(record, config.typedef_aliases);
  v.source = VerdictSource::kExternal;
  return v;
}

// --- Scoring and ranking --------------------------------------------------------

// Computes the full verdict for one record. When an external oracle process
// is supplied and fails, falls back to the built-in surrogate (logged).
inline OracleVerdict ScoreRecord(const FunctionRecord &record,
                                 const OracleConfig &config,
                                 LineProtocolProcess *external) {
  if (external != nullptr) {
    try {
      return ExternalOracleQuery(*external, record, config);
    } catch (const OracleUnavailable &e) {
      LogWarn(std::string("external oracle unavailable for '") + record.name +
              "': " + e.what() + "; falling back to builtin_lexical");
    } catch (const OracleProtocolError &e) {
      LogWarn(std::string("external oracle protocol error for '") +
              record.name + "': " + e.what() +
              "; falling back to builtin_lexical");
    }
  }
  OracleVerdict v;
  v.function_name = record.name;
  auto [score, cwes] = LexicalVulnScore(record);
  v.score = score;
  v.heuristic3_score = score;
  v.predicted_cwes = std::move(cwes);
  v.heuristic1 = Heuristic1(record, config);
  v.heuristic2 = MatchFuzzInterfaceTypes(record, config.typedef_aliases);
  v.source = VerdictSource::kBuiltinLexical;
  return v;
}

// Ranks all records by the convex combination of the three heuristics and
// returns the top_k. CWE hints (from signature specs) override predicted
// CWEs for the named functions. Deterministic: ties break by higher
// heuristic3_score, then lexicographic name.
inline std::vector<TargetCandidate> RankTargets(
    const std::vector<FunctionRecord> &records, const OracleConfig &config,
    const std::map<std::string, std::vector<std::string>> &cwe_hints = {}) {
  config.Validate();
  if (records.empty()) throw EmptyInventory("no functions to rank");

  std::unique_ptr<LineProtocolProcess> external;
  if (config.external_oracle_command.has_value() &&
      !config.external_oracle_command->empty()) {
    try {
      external = std::make_unique<LineProtocolProcess>(
          SubstituteCommandTemplate(*config.external_oracle_command, {}));
    } catch (const std::exception &e) {
      LogWarn(std::string("external oracle failed to start: ") + e.what() +
              "; using builtin_lexical");
    }
  }

  std::vector<TargetCandidate> all;
  all.reserve(records.size());
  for (const auto &rec : records) {
    TargetCandidate c;
    c.record = rec;
    c.verdict = ScoreRecord(rec, config, external.get());
    auto hint = cwe_hints.find(rec.name);
    if (hint != cwe_hints.end() && !hint->second.empty())
      c.verdict.predicted_cwes = hint->second;
    c.composite_score = config.w1 * (c.verdict.heuristic1 ? 1.0 : 0.0) +
                        config.w2 * (c.verdict.heuristic2 ? 1.0 : 0.0) +
                        config.w3 * c.verdict.heuristic3_score;
    all.push_back(std::move(c));
  }
  std::sort(all.begin(), all.end(),
            [](const TargetCandidate &a, const TargetCandidate &b) {
              if (a.composite_score != b.composite_score)
                return a.composite_score > b.composite_score;
              if (a.verdict.heuristic3_score != b.verdict.heuristic3_score)
                return a.verdict.heuristic3_score > b.verdict.heuristic3_score;
              return a.record.name < b.record.name;
            });
  const size_t keep = std::min<size_t>(all.size(),
                                       static_cast<size_t>(config.top_k));
  all.resize(keep);
  for (size_t i = 0; i < all.size(); i++) all[i].rank = static_cast<int>(i) + 1;
  return all;
}

// --- Serialization ----------------------------------------------------------------

inline nlohmann::ordered_json VerdictToJson(const OracleVerdict &v) {
  return nlohmann::ordered_json{
      {"function_name", v.function_name},
      {"score", v.score},
      {"predicted_cwes", v.predicted_cwes},
      {"heuristic1", v.heuristic1},
      {"heuristic2", v.heuristic2},
      {"heuristic3_score", v.heuristic3_score},
      {"source", VerdictSourceName(v.source)}};
}

inline OracleVerdict VerdictFromJson(const nlohmann::json &j) {
  OracleVerdict v;
  v.function_name = j.at("function_name").get<std::string>();
  v.score = j.at("score").get<double>();
  for (const auto &c : j.at("predicted_cwes"))
    v.predicted_cwes.push_back(c.get<std::string>());
  v.heuristic1 = j.at("heuristic1").get<bool>();
  v.heuristic2 = j.at("heuristic2").get<bool>();
  v.heuristic3_score = j.at("heuristic3_score").get<double>();
  v.source = j.at("source").get<std::string>() == "external"
                 ? VerdictSource::kExternal
                 : VerdictSource::kBuiltinLexical;
  return v;
}

inline nlohmann::ordered_json CandidateToJson(const TargetCandidate &c) {
  return nlohmann::ordered_json{{"rank", c.rank},
                                {"composite_score", c.composite_score},
                                {"verdict", VerdictToJson(c.verdict)},
                                {"record", RecordToJson(c.record)}};
}

inline TargetCandidate CandidateFromJson(const nlohmann::json &j) {
  TargetCandidate c;
  c.rank = j.at("rank").get<int>();
  c.composite_score = j.at("composite_score").get<double>();
  c.verdict = VerdictFromJson(j.at("verdict"));
  c.record = RecordFromJson(j.at("record"));
  return c;
}

}  // namespace fuzzoracle

#endif  // FUZZORACLE_ORACLE_H_
