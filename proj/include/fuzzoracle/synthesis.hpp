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
// Driver synthesis: four-section prompt construction with CWE annotations,
// deterministic template drivers for flat-buffer signatures, and the
// fixed prompt-refinement rules applied between attempts.

#ifndef FUZZORACLE_SYNTHESIS_H_
#define FUZZORACLE_SYNTHESIS_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fuzzoracle/inventory.hpp"
#include "fuzzoracle/oracle.hpp"
#include "fuzzoracle/util.hpp"
#include "fuzzoracle/yamljson.hpp"

namespace fuzzoracle {

// --- CWE naming ---------------------------------------------------------------

inline std::string CweName(const std::string &cwe_id) {
  static const std::map<std::string, std::string> kNames = {
      {"CWE-415", "Double Free"},
      {"CWE-416", "Use After Free"},
      {"CWE-787", "Out-of-bounds Write"},
      {"CWE-476", "NULL Pointer Dereference"},
      {"CWE-401", "Memory Leak"},
      {"CWE-122", "Heap-based Buffer Overflow"},
      {"CWE-134", "Uncontrolled Format String"},
      {"CWE-190", "Integer Overflow or Wraparound"}};
  auto it = kNames.find(cwe_id);
  return it != kNames.end() ? it->second : "Unknown";
}

inline std::string CweNoteLine(const std::string &cwe_id) {
  return "Note: The function is a candidate for the vulnerability " + cwe_id +
         " (" + CweName(cwe_id) + ")";
}

// The refinement instruction issued after a crash-free campaign on targets
// whose predicted weakness needs memory pressure to manifest.
inline const char *kNoSizeCapInstruction =
    "Do not impose any upper bound on input or allocation sizes in the "
    "harness.";

inline const std::set<std::string> &MemoryPressureCwes() {
  static const std::set<std::string> kSet = {"CWE-415", "CWE-416", "CWE-787",
                                             "CWE-122"};
  return kSet;
}

// --- Prompt template ------------------------------------------------------------

struct PromptTemplate {
  std::string system_prompt;
  std::string language_instructions;
  std::string instructions_examples;
  std::string problem_statement_template;

  void Validate() const {
    if (system_prompt.empty() || language_instructions.empty() ||
        instructions_examples.empty() || problem_statement_template.empty())
      throw ConfigError("prompt template: all four sections must be non-empty");
    if (problem_statement_template.find("{signature}") == std::string::npos)
      throw ConfigError(
          "prompt template: problem statement lacks the {signature} "
          "placeholder");
  }
};

inline PromptTemplate DefaultPromptTemplate() {
  PromptTemplate t;
  t.system_prompt =
      "You are a security engineer writing fuzz harnesses for a C library. "
      "Your code is correct, minimal, and compiles without warnings.";
  t.language_instructions =
      "Write plain C++ that links against the library's C API. Include every "
      "header the harness needs. Use only the library's public headers. Do "
      "not define main.";
  t.instructions_examples =
      "Your reply must define exactly one fuzzing entry point:\n\n"
      "extern \"C\" int LLVMFuzzerTestOneInput(const uint8_t *data, size_t "
      "size);\n\n"
      "Convert the input buffer into arguments for the target function, call "
      "the target, and release every resource the harness allocates. Reply "
      "with one fenced code block containing the complete harness source and "
      "nothing else.";
  t.problem_statement_template =
      "Write a fuzz harness for the following target function:\n\n"
      "{signature}\n\n"
      "{cwe_note}{extra_instructions}";
  return t;
}

inline PromptTemplate LoadPromptTemplate(const std::string &document,
                                         bool hint_yaml) {
  auto doc = ParseStructuredDocument(document, hint_yaml);
  if (!doc.is_object()) throw ConfigError("prompt template is not a mapping");
  PromptTemplate t;
  t.system_prompt = doc.value("system_prompt", "");
  t.language_instructions = doc.value("language_instructions", "");
  t.instructions_examples = doc.value("instructions_examples", "");
  t.problem_statement_template = doc.value("problem_statement_template", "");
  t.Validate();
  return t;
}

inline PromptTemplate LoadPromptTemplateFile(const std::filesystem::path &p) {
  return LoadPromptTemplate(ReadFile(p), PathLooksYaml(p));
}

// --- Prompt rendering -------------------------------------------------------------

struct Prompt {
  std::string rendered_text;
  std::string target_function;
  std::vector<std::string> cwe_annotations;
  int attempt = 1;
};

namespace synthesis_detail {

inline void ReplaceAll(std::string &text, const std::string &pat,
                       const std::string &value) {
  size_t pos = 0;
  while ((pos = text.find(pat, pos)) != std::string::npos) {
    text.replace(pos, pat.size(), value);
    pos += value.size();
  }
}

}  // namespace synthesis_detail

// Renders the four sections in order, separated by blank lines. The CWE
// note block contributes one line per predicted CWE; `extra` lands verbatim
// at the end of the problem statement.
inline Prompt BuildPrompt(const TargetCandidate &target,
                          const PromptTemplate &tmpl, const std::string &extra,
                          int attempt = 1) {
  tmpl.Validate();
  if (target.record.name.empty() || target.record.return_type.empty())
    throw MissingSignature("target '" + target.record.name +
                           "' lacks a renderable signature");
  std::string cwe_note;
  for (const auto &cwe : target.verdict.predicted_cwes)
    cwe_note += CweNoteLine(cwe) + "\n";

  std::string body = tmpl.problem_statement_template;
  synthesis_detail::ReplaceAll(body, "{signature}",
                               RenderSignature(target.record));
  synthesis_detail::ReplaceAll(body, "{cwe_note}", cwe_note);
  synthesis_detail::ReplaceAll(body, "{extra_instructions}", extra);

  Prompt p;
  p.rendered_text = tmpl.system_prompt + "\n\n" + tmpl.language_instructions +
                    "\n\n" + tmpl.instructions_examples + "\n\n" + body;
  p.target_function = target.record.name;
  p.cwe_annotations = target.verdict.predicted_cwes;
  p.attempt = attempt;
  return p;
}

// --- Driver candidates --------------------------------------------------------------

enum class Provenance { kLlm, kTemplate };

inline const char *ProvenanceName(Provenance p) {
  return p == Provenance::kLlm ? "llm" : "template";
}

struct DriverCandidate {
  std::string source_text;
  Provenance provenance = Provenance::kTemplate;
  int attempt = 1;
  std::string target_function;
};

// --- Template driver ----------------------------------------------------------------

namespace synthesis_detail {

// Byte widths for parameter types the template driver can materialize from
// a flat input buffer (LP64 widths).
inline const std::map<std::string, int> &IntWidths() {
  static const std::map<std::string, int> kMap = {
      {"char", 1},          {"signed char", 1},
      {"unsigned char", 1}, {"short", 2},
      {"short int", 2},     {"unsigned short", 2},
      {"unsigned short int", 2}, {"int", 4},
      {"unsigned", 4},      {"unsigned int", 4},
      {"long", 8},          {"long int", 8},
      {"unsigned long", 8}, {"unsigned long int", 8},
      {"long long", 8},     {"unsigned long long", 8},
      {"int8_t", 1},        {"int16_t", 2},
      {"uint16_t", 2},      {"int32_t", 4},
      {"uint32_t", 4},      {"int64_t", 8},
      {"uint64_t", 8}};
  return kMap;
}

inline std::optional<int> IntWidthOf(const std::string &type) {
  const std::string norm = NormalizeTypeText(type, DefaultTypedefMap());
  auto it = IntWidths().find(norm);
  if (it == IntWidths().end()) return std::nullopt;
  return it->second;
}

inline bool IsBytePointer(const std::string &type) {
  const std::string norm = NormalizeTypeText(type, DefaultTypedefMap());
  return norm == "char *" || norm == "unsigned char *" ||
         norm == "signed char *";
}

}  // namespace synthesis_detail

// Emits a deterministic driver for targets whose parameters decompose into
// leading integers plus an optional trailing (byte pointer, length) pair.
// Throws UnsupportedSignature otherwise; such targets are LLM-only.
inline DriverCandidate TemplateDriver(const TargetCandidate &target,
                                      int attempt = 1) {
  using synthesis_detail::IntWidthOf;
  using synthesis_detail::IsBytePointer;
  const FunctionRecord &rec = target.record;
  if (rec.name.empty() || rec.return_type.empty())
    throw MissingSignature("target lacks a renderable signature");
  if (rec.is_variadic)
    throw UnsupportedSignature(rec.name + ": variadic signature");
  if (rec.has_function_pointer_param)
    throw UnsupportedSignature(rec.name + ": function-pointer parameter");

  const size_t n = rec.params.size();
  size_t int_count = 0;
  while (int_count < n && IntWidthOf(rec.params[int_count].type).has_value())
    int_count++;
  bool has_pair = false;
  if (int_count < n) {
    if (n - int_count == 2 && IsBytePointer(rec.params[int_count].type) &&
        IntWidthOf(rec.params[int_count + 1].type).has_value()) {
      has_pair = true;
    } else {
      throw UnsupportedSignature(rec.name + ": parameter '" +
                                 rec.params[int_count].name + "' of type '" +
                                 rec.params[int_count].type +
                                 "' is outside the supported-type table");
    }
  }

  std::string src;
  src += "// Generated fuzz driver for '" + rec.name +
         "' (template synthesis).\n";
  src += "#include <stddef.h>\n#include <stdint.h>\n#include <stdlib.h>\n";
  src += "#include <string.h>\n\n";
  src += "extern \"C\" " + RenderSignature(rec) + ";\n\n";
  src += "extern \"C\" int LLVMFuzzerTestOneInput(const uint8_t *data, "
         "size_t size) {\n";

  int total_int_bytes = 0;
  for (size_t k = 0; k < int_count; k++)
    total_int_bytes += *IntWidthOf(rec.params[k].type);
  if (total_int_bytes > 0)
    src += "  if (size < " + std::to_string(total_int_bytes) +
           ") return 0;\n";

  std::vector<std::string> call_args;
  for (size_t k = 0; k < int_count; k++) {
    const int w = *IntWidthOf(rec.params[k].type);
    const std::string idx = std::to_string(k);
    const std::string &type = rec.params[k].type;
    src += "  uint64_t raw" + idx + " = 0;\n";
    src += "  for (size_t i = 0; i < " + std::to_string(w) +
           "; i++) raw" + idx + " |= (uint64_t)data[i] << (8 * i);\n";
    src += "  " + type + " arg" + idx + " = (" + type + ")raw" + idx + ";\n";
    src += "  data += " + std::to_string(w) + ";\n";
    src += "  size -= " + std::to_string(w) + ";\n";
    call_args.push_back("(" + type + ")arg" + idx);
  }

  bool copies_buffer = false;
  if (has_pair) {
    const std::string &ptr_type = rec.params[int_count].type;
    const std::string &len_type = rec.params[int_count + 1].type;
    if (ptr_type.find("const") == std::string::npos) {
      // Mutable buffer parameter: the engine's input is read-only, so the
      // driver hands the target a private copy.
      copies_buffer = true;
      src += "  uint8_t *copy = (uint8_t *)malloc(size ? size : 1);\n";
      src += "  if (copy == NULL) return 0;\n";
      src += "  memcpy(copy, data, size);\n";
      call_args.push_back("(" + ptr_type + ")copy");
    } else {
      call_args.push_back("(" + ptr_type + ")data");
    }
    call_args.push_back("(" + len_type + ")size");
  }

  src += "  (void)" + rec.name + "(";
  for (size_t k = 0; k < call_args.size(); k++) {
    if (k) src += ", ";
    src += call_args[k];
  }
  src += ");\n";
  if (copies_buffer) src += "  free(copy);\n";
  src += "  return 0;\n}\n";

  DriverCandidate cand;
  cand.source_text = src;
  cand.provenance = Provenance::kTemplate;
  cand.attempt = attempt;
  cand.target_function = rec.name;
  return cand;
}

// --- Completion post-processing --------------------------------------------------------

// Extracts the first fenced code block from a model reply; the whole reply
// when no fence is present.
inline std::string ExtractCodeBlock(const std::string &reply) {
  const size_t open = reply.find("```");
  if (open == std::string::npos) return reply;
  size_t content = reply.find('\n', open);
  if (content == std::string::npos) return reply;
  content++;
  const size_t close = reply.find("```", content);
  if (close == std::string::npos) return reply.substr(content);
  return reply.substr(content, close - content);
}

// --- Generation session and refinement ---------------------------------------------------

struct AttemptOutcome {
  Prompt prompt;
  DriverCandidate candidate;
  bool gate_passed = false;
  bool campaign_ran = false;
  bool campaign_found_crash = false;
  std::string failure_diagnostics;  // gate diagnostics when the gate failed
};

struct GenerationSession {
  TargetCandidate target;
  int max_attempts = 5;
  std::vector<AttemptOutcome> history;
  double temperature = 0.0;
};

// Composes the `extra` text for the next prompt from the last failure:
// the leading diagnostics excerpt after a gate failure, or the no-size-cap
// instruction after a crash-free campaign on a memory-pressure CWE target.
inline std::string ComposeRefinementExtra(const GenerationSession &session) {
  if (session.history.empty()) return "";
  const AttemptOutcome &last = session.history.back();
  if (!last.gate_passed) {
    const auto lines = SplitLines(last.failure_diagnostics);
    std::string extra;
    const size_t cap = std::min<size_t>(lines.size(), 50);
    for (size_t i = 0; i < cap; i++) {
      extra += lines[i];
      extra += '\n';
    }
    return extra;
  }
  if (last.campaign_ran && !last.campaign_found_crash) {
    for (const auto &cwe : session.target.verdict.predicted_cwes)
      if (MemoryPressureCwes().count(cwe)) return kNoSizeCapInstruction;
  }
  return "";
}

// Builds the next attempt's prompt. Throws AttemptsExhausted when the
// session is already at max_attempts.
inline Prompt RefinePrompt(const GenerationSession &session,
                           const PromptTemplate &tmpl) {
  if (static_cast<int>(session.history.size()) >= session.max_attempts)
    throw AttemptsExhausted("target '" + session.target.record.name +
                            "': all " + std::to_string(session.max_attempts) +
                            " attempts used");
  const int next_attempt = static_cast<int>(session.history.size()) + 1;
  return BuildPrompt(session.target, tmpl, ComposeRefinementExtra(session),
                     next_attempt);
}

}  // namespace fuzzoracle

#endif  // FUZZORACLE_SYNTHESIS_H_
