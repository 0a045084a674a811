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

#include <random>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fuzzoracle/backend.hpp"
#include "fuzzoracle/synthesis.hpp"
#include "test_support.hpp"

using namespace fuzzoracle;
using testsupport::RepoDir;

namespace {

TargetCandidate GdTarget() {
  auto spec = LoadSignatureSpecFile(RepoDir() / "fixtures" / "specs" /
                                    "gdImageWebpPtr.yaml");
  TargetCandidate target;
  target.record = SpecToRecord(spec);
  target.verdict.function_name = spec.function_name;
  target.verdict.predicted_cwes = spec.cwe_hints;
  return target;
}

TargetCandidate ToyTarget(const std::string &name,
                          std::vector<std::string> cwes = {}) {
  TargetCandidate target;
  target.record = testsupport::ToylibRecord(name);
  target.verdict.function_name = name;
  target.verdict.predicted_cwes = std::move(cwes);
  return target;
}

size_t CountOccurrences(const std::string &text, const std::string &needle) {
  size_t n = 0;
  for (size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    n++;
  return n;
}

}  // namespace

TEST_CASE("golden prompt: byte-level fidelity for the CWE-415 target") {
  const Prompt prompt = BuildPrompt(GdTarget(), DefaultPromptTemplate(), "");
  const std::string golden = ReadFile(RepoDir() / "tests" / "goldens" /
                                      "golden_prompt_gdImageWebpPtr.txt");
  CHECK(prompt.rendered_text == golden);
  CHECK(prompt.rendered_text.find(
            "Note: The function is a candidate for the vulnerability CWE-415 "
            "(Double Free)") != std::string::npos);
}

TEST_CASE("prompt sections appear in order") {
  const auto tmpl = DefaultPromptTemplate();
  const Prompt prompt = BuildPrompt(GdTarget(), tmpl, "");
  const size_t s1 = prompt.rendered_text.find(tmpl.system_prompt);
  const size_t s2 = prompt.rendered_text.find(tmpl.language_instructions);
  const size_t s3 = prompt.rendered_text.find(tmpl.instructions_examples);
  const size_t s4 =
      prompt.rendered_text.find("Write a fuzz harness for the following");
  REQUIRE(s1 != std::string::npos);
  REQUIRE(s2 != std::string::npos);
  REQUIRE(s3 != std::string::npos);
  REQUIRE(s4 != std::string::npos);
  CHECK(s1 < s2);
  CHECK(s2 < s3);
  CHECK(s3 < s4);
}

TEST_CASE("no CWE prediction means no note line") {
  const Prompt prompt =
      BuildPrompt(ToyTarget("toy_checksum"), DefaultPromptTemplate(), "");
  CHECK(prompt.rendered_text.find("Note: The function is a candidate") ==
        std::string::npos);
}

TEST_CASE("extra instructions land verbatim at the end") {
  const Prompt prompt = BuildPrompt(GdTarget(), DefaultPromptTemplate(),
                                    kNoSizeCapInstruction);
  const std::string text = prompt.rendered_text;
  const std::string tail = kNoSizeCapInstruction;
  REQUIRE(text.size() >= tail.size());
  CHECK(text.substr(text.size() - tail.size()) == tail);
}

TEST_CASE("one note line per predicted CWE") {
  auto target = ToyTarget("toy_decode_packet", {"CWE-415", "CWE-416"});
  const Prompt prompt = BuildPrompt(target, DefaultPromptTemplate(), "");
  CHECK(CountOccurrences(prompt.rendered_text,
                         "Note: The function is a candidate") == 2);
  CHECK(prompt.rendered_text.find("CWE-416 (Use After Free)") !=
        std::string::npos);
}

TEST_CASE("shipped template file equals the built-in default") {
  const auto from_file =
      LoadPromptTemplateFile(RepoDir() / "share" / "prompt_template.yaml");
  const auto builtin = DefaultPromptTemplate();
  CHECK(from_file.system_prompt == builtin.system_prompt);
  CHECK(from_file.language_instructions == builtin.language_instructions);
  CHECK(from_file.instructions_examples == builtin.instructions_examples);
  CHECK(from_file.problem_statement_template ==
        builtin.problem_statement_template);
}

TEST_CASE("template validation rejects missing pieces") {
  PromptTemplate t = DefaultPromptTemplate();
  t.system_prompt = "";
  CHECK_THROWS_AS(t.Validate(), ConfigError);
  t = DefaultPromptTemplate();
  t.problem_statement_template = "no placeholder here";
  CHECK_THROWS_AS(t.Validate(), ConfigError);
}

TEST_CASE("missing signature raises MissingSignature") {
  TargetCandidate target;
  target.record.name = "";
  CHECK_THROWS_AS(BuildPrompt(target, DefaultPromptTemplate(), ""),
                  MissingSignature);
}

TEST_CASE("CWE note line names") {
  CHECK(CweNoteLine("CWE-415") ==
        "Note: The function is a candidate for the vulnerability CWE-415 "
        "(Double Free)");
  CHECK(CweNoteLine("CWE-787") ==
        "Note: The function is a candidate for the vulnerability CWE-787 "
        "(Out-of-bounds Write)");
  CHECK(CweNoteLine("CWE-9999").find("(Unknown)") != std::string::npos);
}

TEST_CASE("code block extraction takes the first fence, else everything") {
  CHECK(ExtractCodeBlock("prose\n```cpp\nint x;\n```\nmore") == "int x;\n");
  CHECK(ExtractCodeBlock("```\na\n```\n```\nb\n```") == "a\n");
  CHECK(ExtractCodeBlock("no fence at all") == "no fence at all");
  CHECK(ExtractCodeBlock("```c\nunterminated\nfence") == "unterminated\nfence");
}

TEST_CASE("template driver forwards the fuzz interface byte-exactly") {
  auto cand = TemplateDriver(ToyTarget("toy_decode_packet"));
  const std::string golden =
      ReadFile(RepoDir() / "tests" / "goldens" / "golden_forward.cc");
  CHECK(cand.source_text == golden);
  CHECK(cand.provenance == Provenance::kTemplate);
}

TEST_CASE("template driver slices integers little-endian byte-exactly") {
  TargetCandidate target;
  target.record.name = "demo_process";
  target.record.return_type = "int";
  target.record.params = {{"mode", "int"},
                          {"buf", "const uint8_t *"},
                          {"len", "size_t"}};
  auto cand = TemplateDriver(target);
  const std::string golden =
      ReadFile(RepoDir() / "tests" / "goldens" / "golden_sliced.cc");
  CHECK(cand.source_text == golden);
}

TEST_CASE("unsupported signatures raise UnsupportedSignature") {
  CHECK_THROWS_AS(TemplateDriver(GdTarget()), UnsupportedSignature);

  TargetCandidate variadic;
  variadic.record.name = "vfn";
  variadic.record.return_type = "int";
  variadic.record.params = {{"fmt", "const char *"}};
  variadic.record.is_variadic = true;
  CHECK_THROWS_AS(TemplateDriver(variadic), UnsupportedSignature);

  TargetCandidate fnptr;
  fnptr.record.name = "cbfn";
  fnptr.record.return_type = "int";
  fnptr.record.params = {{"cb", "int (*)(void)"}};
  fnptr.record.has_function_pointer_param = true;
  CHECK_THROWS_AS(TemplateDriver(fnptr), UnsupportedSignature);
}

TEST_CASE("driver candidates define one entry point and reference the target") {
  for (const auto &name :
       {"toy_decode_packet", "toy_render_tile", "toy_checksum"}) {
    auto cand = TemplateDriver(ToyTarget(name));
    CHECK(CountOccurrences(cand.source_text,
                           "int LLVMFuzzerTestOneInput(const uint8_t *data, "
                           "size_t size) {") == 1);
    CHECK(cand.source_text.find(name) != std::string::npos);
  }
}

TEST_CASE("replay backend round-trips a canned completion") {
  const auto dir = testsupport::ScratchDir("replay");
  ReplayBackend backend(dir);
  Prompt prompt = BuildPrompt(ToyTarget("toy_decode_packet", {"CWE-415"}),
                              DefaultPromptTemplate(), "");
  const std::string reply = "chatter\n```cpp\nint fuzz_me;\n```\n";
  WriteFile(backend.FixturePath(prompt.rendered_text), reply);

  std::string raw;
  auto cand = GenerateDriver(prompt, backend, &raw);
  CHECK(raw == reply);
  CHECK(cand.source_text == "int fuzz_me;\n");
  CHECK(cand.provenance == Provenance::kLlm);

  Prompt other = BuildPrompt(ToyTarget("toy_render_tile", {"CWE-787"}),
                             DefaultPromptTemplate(), "");
  CHECK_THROWS_AS(GenerateDriver(other, backend), BackendUnavailable);
}

TEST_CASE("prose-only replies pass through whole") {
  const auto dir = testsupport::ScratchDir("replay");
  ReplayBackend backend(dir);
  Prompt prompt = BuildPrompt(ToyTarget("toy_checksum"),
                              DefaultPromptTemplate(), "");
  WriteFile(backend.FixturePath(prompt.rendered_text),
            "I cannot write that harness.");
  auto cand = GenerateDriver(prompt, backend);
  CHECK(cand.source_text == "I cannot write that harness.");
}

TEST_CASE("blank replies count as EmptyCompletion") {
  const auto dir = testsupport::ScratchDir("replay");
  ReplayBackend backend(dir);
  Prompt prompt = BuildPrompt(ToyTarget("toy_checksum"),
                              DefaultPromptTemplate(), "");
  WriteFile(backend.FixturePath(prompt.rendered_text), "  \n \n");
  CHECK_THROWS_AS(GenerateDriver(prompt, backend), EmptyCompletion);
}

TEST_CASE("gate-failure refinement carries the first 50 diagnostic lines") {
  GenerationSession session;
  session.target = ToyTarget("toy_decode_packet", {"CWE-415"});
  session.max_attempts = 5;

  AttemptOutcome failed;
  failed.prompt = BuildPrompt(session.target, DefaultPromptTemplate(), "");
  failed.gate_passed = false;
  std::string diagnostics;
  for (int i = 1; i <= 60; i++)
    diagnostics += "error line " + std::to_string(i) + "\n";
  failed.failure_diagnostics = diagnostics;
  session.history.push_back(failed);

  const std::string extra = ComposeRefinementExtra(session);
  CHECK(extra.find("error line 1\n") != std::string::npos);
  CHECK(extra.find("error line 50\n") != std::string::npos);
  CHECK(extra.find("error line 51") == std::string::npos);

  const Prompt next = RefinePrompt(session, DefaultPromptTemplate());
  CHECK(next.attempt == 2);
  CHECK(next.rendered_text.find("error line 1") != std::string::npos);
}

TEST_CASE("compile-diagnostic excerpt lands in the next prompt") {
  GenerationSession session;
  session.target = GdTarget();
  session.max_attempts = 5;
  AttemptOutcome failed;
  failed.gate_passed = false;
  failed.failure_diagnostics = "undeclared identifier 'gdImageWebpPtr'";
  session.history.push_back(failed);
  const Prompt next = RefinePrompt(session, DefaultPromptTemplate());
  CHECK(next.rendered_text.find("undeclared identifier 'gdImageWebpPtr'") !=
        std::string::npos);
}

TEST_CASE("crash-free campaign adds the size-cap lift only for memory CWEs") {
  auto crash_free_session = [](std::vector<std::string> cwes) {
    GenerationSession session;
    session.target = ToyTarget("toy_decode_packet", std::move(cwes));
    session.max_attempts = 5;
    AttemptOutcome ok;
    ok.gate_passed = true;
    ok.campaign_ran = true;
    ok.campaign_found_crash = false;
    session.history.push_back(ok);
    return session;
  };

  CHECK(ComposeRefinementExtra(crash_free_session({"CWE-415"})) ==
        kNoSizeCapInstruction);
  CHECK(ComposeRefinementExtra(crash_free_session({"CWE-416"})) ==
        kNoSizeCapInstruction);
  CHECK(ComposeRefinementExtra(crash_free_session({"CWE-787"})) ==
        kNoSizeCapInstruction);
  CHECK(ComposeRefinementExtra(crash_free_session({"CWE-122"})) ==
        kNoSizeCapInstruction);
  CHECK(ComposeRefinementExtra(crash_free_session({"CWE-134"})).empty());
  CHECK(ComposeRefinementExtra(crash_free_session({})).empty());

  const Prompt next =
      RefinePrompt(crash_free_session({"CWE-415"}), DefaultPromptTemplate());
  CHECK(next.rendered_text.find(kNoSizeCapInstruction) != std::string::npos);
}

TEST_CASE("invariant: prompt building is deterministic") {
  const Prompt a = BuildPrompt(GdTarget(), DefaultPromptTemplate(), "x");
  const Prompt b = BuildPrompt(GdTarget(), DefaultPromptTemplate(), "x");
  CHECK(a.rendered_text == b.rendered_text);
}

TEST_CASE("invariant: attempt indices increase and respect max_attempts") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 100; trial++) {
    GenerationSession session;
    session.target = ToyTarget("toy_decode_packet", {"CWE-415"});
    session.max_attempts = 1 + static_cast<int>(rng() % 5);
    int last_attempt = 0;
    while (true) {
      Prompt prompt;
      try {
        prompt = RefinePrompt(session, DefaultPromptTemplate());
      } catch (const AttemptsExhausted &) {
        break;
      }
      CHECK(prompt.attempt == last_attempt + 1);
      CHECK(prompt.attempt <= session.max_attempts);
      last_attempt = prompt.attempt;

      AttemptOutcome outcome;
      outcome.prompt = prompt;
      outcome.gate_passed = (rng() % 2) == 0;
      outcome.campaign_ran = outcome.gate_passed;
      outcome.campaign_found_crash = false;
      outcome.failure_diagnostics = "synthetic failure";
      session.history.push_back(outcome);
      CHECK(static_cast<int>(session.history.size()) <= session.max_attempts);
    }
    CHECK(last_attempt == session.max_attempts);
  }
}
