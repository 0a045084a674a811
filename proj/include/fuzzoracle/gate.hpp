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
// Harness gate: admits a driver candidate only when it (1) compiles against
// the target library, (2) survives a smoke run over trivial seeds, and
// (3) actually reaches the target function (line coverage of its span).

#ifndef FUZZORACLE_GATE_H_
#define FUZZORACLE_GATE_H_

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fuzzoracle/inventory.hpp"
#include "fuzzoracle/subprocess.hpp"
#include "fuzzoracle/synthesis.hpp"
#include "fuzzoracle/util.hpp"

namespace fuzzoracle {

enum class Sanitizer { kAddress, kUndefined, kLeak };

struct BuildConfig {
  std::string compiler_command =
      "clang++ -g -O1 -fno-omit-frame-pointer {sanitizer_flags} "
      "{coverage_flags} {includes} {source} {libs} -o {output}";
  std::set<Sanitizer> sanitizers = {Sanitizer::kAddress};
  bool coverage_instrumentation = true;
  std::filesystem::path library_build_dir;
  std::vector<std::string> library_archives;
  std::vector<std::filesystem::path> include_dirs;
  int timeout_seconds = 10;
  double coverage_threshold = 0.1;
  std::string gcov_command = "gcov";

  void Validate() {
    // Campaign binaries must always carry the address sanitizer.
    sanitizers.insert(Sanitizer::kAddress);
    if (timeout_seconds < 1) throw ConfigError("timeout_seconds must be >= 1");
    if (coverage_threshold < 0.0 || coverage_threshold > 1.0)
      throw ConfigError("coverage_threshold must be in [0,1]");
  }
};

enum class SmokeResult {
  kPass,
  kCrashOnEmpty,
  kImmediateExitFailure,
  kTimeout,
  kNotRun
};

inline const char *SmokeResultName(SmokeResult r) {
  switch (r) {
    case SmokeResult::kPass: return "pass";
    case SmokeResult::kCrashOnEmpty: return "crash_on_empty";
    case SmokeResult::kImmediateExitFailure: return "immediate_exit_failure";
    case SmokeResult::kTimeout: return "timeout";
    case SmokeResult::kNotRun: return "not_run";
  }
  return "not_run";
}

enum class GateStage { kCompile, kExecute, kCoverage };

inline const char *GateStageName(GateStage s) {
  switch (s) {
    case GateStage::kCompile: return "compile";
    case GateStage::kExecute: return "execute";
    case GateStage::kCoverage: return "coverage";
  }
  return "compile";
}

struct GateReport {
  std::string target_function;
  Provenance provenance = Provenance::kTemplate;
  int attempt = 1;
  bool compiled = false;
  std::string compile_diagnostics;
  SmokeResult smoke_run = SmokeResult::kNotRun;
  std::string smoke_diagnostics;
  double coverage_fraction = 0.0;
  bool accepted = false;
  std::optional<GateStage> rejected_stage;
  std::string binary_path;  // set when compilation succeeded
};

// Trivial seed set: empty input, one zero byte, 4 KiB of 0xFF.
inline std::vector<std::string> DefaultSmokeSeeds() {
  return {std::string(), std::string(1, '\0'),
          std::string(4096, static_cast<char>(0xFF))};
}

namespace gate_detail {

inline std::vector<std::string> SanitizerFlags(const std::set<Sanitizer> &sans) {
  // The fuzzing engine is linked in unconditionally; sanitizers append in a
  // fixed order for reproducible command lines.
  std::string flag = "-fsanitize=fuzzer";
  if (sans.count(Sanitizer::kAddress)) flag += ",address";
  if (sans.count(Sanitizer::kUndefined)) flag += ",undefined";
  if (sans.count(Sanitizer::kLeak)) flag += ",leak";
  return {flag};
}

inline std::vector<std::string> CoverageFlags(bool enabled) {
  // The gcov writer version must be readable by the system gcov tool.
  if (!enabled) return {};
  return {"--coverage", "-Xclang", "-coverage-version=B14c"};
}

}  // namespace gate_detail

// --- Condition (1): compile -------------------------------------------------

// Compiles the candidate in `workdir`, linking the target library archive,
// sanitizers and coverage. Returns the binary path on success, nullopt on a
// rejected candidate; diagnostics are captured verbatim either way.
// Throws ToolchainMissing when the compiler cannot be spawned at all.
inline std::pair<std::optional<std::filesystem::path>, std::string>
CompileCandidate(const DriverCandidate &candidate, const BuildConfig &config,
                 const std::filesystem::path &workdir) {
  std::filesystem::create_directories(workdir);
  const auto source = workdir / "driver.cc";
  const auto output = workdir / "harness";
  WriteFile(source, candidate.source_text);

  std::map<std::string, std::vector<std::string>> vars;
  vars["source"] = {source.string()};
  vars["output"] = {output.string()};
  vars["includes"] = {};
  for (const auto &dir : config.include_dirs)
    vars["includes"].push_back("-I" + dir.string());
  vars["libs"] = config.library_archives;
  vars["sanitizer_flags"] = gate_detail::SanitizerFlags(config.sanitizers);
  vars["coverage_flags"] =
      gate_detail::CoverageFlags(config.coverage_instrumentation);

  CommandSpec spec;
  spec.argv = SubstituteCommandTemplate(config.compiler_command, vars);
  spec.cwd = workdir;
  spec.timeout_seconds = 120;
  CommandResult res = RunCommand(spec);
  if (res.spawn_failed)
    throw ToolchainMissing("compiler not found: " + spec.argv[0]);
  const std::string diagnostics = res.std_err + res.std_out;
  if (!res.ok() || !std::filesystem::exists(output))
    return {std::nullopt, diagnostics};
  return {output, diagnostics};
}

// --- Condition (2): execute -------------------------------------------------

// Runs the harness once per seed. Every run must exit cleanly within the
// timeout; a crash on these trivial inputs means the harness itself is
// broken, never a finding.
inline std::pair<SmokeResult, std::string> SmokeRun(
    const std::filesystem::path &binary, const std::vector<std::string> &seeds,
    const BuildConfig &config, const std::filesystem::path &workdir) {
  const auto seed_dir = workdir / "smoke";
  std::filesystem::create_directories(seed_dir);
  int idx = 0;
  for (const auto &seed : seeds) {
    const auto seed_file = seed_dir / ("seed" + std::to_string(idx++));
    WriteFile(seed_file, seed);
    CommandSpec spec;
    spec.argv = {binary.string(), seed_file.string()};
    spec.cwd = seed_dir;
    spec.timeout_seconds = config.timeout_seconds;
    // Coverage data from smoke runs is scratch; keep it out of the
    // measurement directory.
    spec.env = {{"GCOV_PREFIX", (seed_dir / "gcov-scratch").string()},
                {"GCOV_PREFIX_STRIP", "999"}};
    CommandResult res = RunCommand(spec);
    if (res.timed_out)
      return {SmokeResult::kTimeout,
              "seed " + std::to_string(idx - 1) + " timed out"};
    if (!res.ok()) {
      const SmokeResult kind = seed.empty() ? SmokeResult::kCrashOnEmpty
                                            : SmokeResult::kImmediateExitFailure;
      return {kind, res.std_err};
    }
  }
  return {SmokeResult::kPass, ""};
}

// --- Condition (3): coverage -------------------------------------------------

// Replays input files through the instrumented binary, redirecting the
// profile dump into `cov_dir`, then reads per-line counts for the target's
// span via the gcov tool's JSON report.
inline double MeasureCoverageFiles(const std::filesystem::path &binary,
                                   const std::vector<std::filesystem::path> &inputs,
                                   const FunctionRecord &target,
                                   const BuildConfig &config,
                                   const std::filesystem::path &cov_dir) {
  if (inputs.empty()) return 0.0;
  std::error_code ec;
  std::filesystem::remove_all(cov_dir, ec);
  std::filesystem::create_directories(cov_dir);

  for (const auto &input : inputs) {
    CommandSpec spec;
    spec.argv = {binary.string(), input.string()};
    spec.cwd = cov_dir;
    spec.timeout_seconds = config.timeout_seconds;
    spec.env = {{"GCOV_PREFIX", cov_dir.string()},
                {"GCOV_PREFIX_STRIP", "999"}};
    RunCommand(spec);  // crashes still flush coverage for prior inputs
  }

  // gcov wants the compile-time notes file next to the runtime counts.
  for (const auto &dir :
       {config.library_build_dir, binary.parent_path()}) {
    if (dir.empty() || !std::filesystem::exists(dir)) continue;
    for (const auto &entry : std::filesystem::directory_iterator(dir)) {
      if (entry.path().extension() == ".gcno")
        std::filesystem::copy_file(
            entry.path(), cov_dir / entry.path().filename(),
            std::filesystem::copy_options::overwrite_existing, ec);
    }
  }

  CommandSpec gcov;
  gcov.argv = {config.gcov_command, "--json-format", "--stdout", "-o",
               cov_dir.string(), target.source_path};
  gcov.cwd = cov_dir;
  gcov.timeout_seconds = 60;
  CommandResult res = RunCommand(gcov);
  if (res.spawn_failed || res.timed_out || res.signaled) {
    LogWarn("coverage tool unavailable (" + config.gcov_command +
            "); treating coverage as 0");
    return 0.0;
  }
  auto report = nlohmann::json::parse(res.std_out, nullptr, false);
  if (report.is_discarded() || !report.contains("files")) {
    LogWarn("coverage dump unreadable for " + target.source_path +
            "; treating coverage as 0");
    return 0.0;
  }

  const std::string want =
      std::filesystem::path(target.source_path).filename().string();
  int executable = 0, executed = 0;
  for (const auto &file : report["files"]) {
    const std::string name = file.value("file", "");
    if (std::filesystem::path(name).filename().string() != want) continue;
    for (const auto &line : file["lines"]) {
      const int ln = line.value("line_number", 0);
      if (ln < target.line_start || ln > target.line_end) continue;
      executable++;
      if (line.value("count", 0.0) > 0) executed++;
    }
  }
  if (executable == 0) {
    LogWarn("no executable lines attributed to '" + target.name +
            "' in the coverage dump; treating coverage as 0");
    return 0.0;
  }
  return static_cast<double>(executed) / static_cast<double>(executable);
}

inline double MeasureCoverage(const std::filesystem::path &binary,
                              const std::vector<std::string> &seeds,
                              const FunctionRecord &target,
                              const BuildConfig &config,
                              const std::filesystem::path &workdir) {
  if (seeds.empty()) return 0.0;
  const auto seed_dir = workdir / "covseeds";
  std::filesystem::create_directories(seed_dir);
  std::vector<std::filesystem::path> files;
  int idx = 0;
  for (const auto &seed : seeds) {
    const auto f = seed_dir / ("seed" + std::to_string(idx++));
    WriteFile(f, seed);
    files.push_back(f);
  }
  return MeasureCoverageFiles(binary, files, target, config,
                              workdir / "cov");
}

// --- The gate ------------------------------------------------------------------

// Evaluates the three admission conditions in order, short-circuiting at
// the first failure.
inline GateReport Gate(const DriverCandidate &candidate, BuildConfig config,
                       const FunctionRecord &target,
                       const std::filesystem::path &workdir,
                       const std::vector<std::string> &seeds = DefaultSmokeSeeds()) {
  config.Validate();
  GateReport report;
  report.target_function = candidate.target_function;
  report.provenance = candidate.provenance;
  report.attempt = candidate.attempt;

  auto [binary, diagnostics] = CompileCandidate(candidate, config, workdir);
  report.compile_diagnostics = diagnostics;
  if (!binary.has_value()) {
    report.rejected_stage = GateStage::kCompile;
    return report;
  }
  report.compiled = true;
  report.binary_path = binary->string();

  auto [smoke, smoke_diag] = SmokeRun(*binary, seeds, config, workdir);
  report.smoke_run = smoke;
  report.smoke_diagnostics = smoke_diag;
  if (smoke != SmokeResult::kPass) {
    report.rejected_stage = GateStage::kExecute;
    return report;
  }

  report.coverage_fraction =
      MeasureCoverage(*binary, seeds, target, config, workdir);
  if (report.coverage_fraction < config.coverage_threshold) {
    report.rejected_stage = GateStage::kCoverage;
    return report;
  }
  report.accepted = true;
  return report;
}

// --- Serialization ----------------------------------------------------------------

inline nlohmann::ordered_json GateReportToJson(const GateReport &r) {
  nlohmann::ordered_json j{
      {"target_function", r.target_function},
      {"provenance", ProvenanceName(r.provenance)},
      {"attempt", r.attempt},
      {"compiled", r.compiled},
      {"compile_diagnostics", r.compile_diagnostics},
      {"smoke_run", SmokeResultName(r.smoke_run)},
      {"smoke_diagnostics", r.smoke_diagnostics},
      {"coverage_fraction", r.coverage_fraction},
      {"verdict", r.accepted ? "accepted" : "rejected"},
      {"binary_path", r.binary_path}};
  j["rejected_stage"] = r.rejected_stage.has_value()
                            ? nlohmann::ordered_json(GateStageName(*r.rejected_stage))
                            : nlohmann::ordered_json(nullptr);
  return j;
}

inline GateReport GateReportFromJson(const nlohmann::json &j) {
  GateReport r;
  r.target_function = j.at("target_function").get<std::string>();
  r.provenance = j.at("provenance").get<std::string>() == "llm"
                     ? Provenance::kLlm
                     : Provenance::kTemplate;
  r.attempt = j.value("attempt", 1);
  r.compiled = j.at("compiled").get<bool>();
  r.compile_diagnostics = j.value("compile_diagnostics", "");
  const std::string smoke = j.value("smoke_run", "not_run");
  if (smoke == "pass") r.smoke_run = SmokeResult::kPass;
  else if (smoke == "crash_on_empty") r.smoke_run = SmokeResult::kCrashOnEmpty;
  else if (smoke == "immediate_exit_failure")
    r.smoke_run = SmokeResult::kImmediateExitFailure;
  else if (smoke == "timeout") r.smoke_run = SmokeResult::kTimeout;
  else r.smoke_run = SmokeResult::kNotRun;
  r.smoke_diagnostics = j.value("smoke_diagnostics", "");
  r.coverage_fraction = j.value("coverage_fraction", 0.0);
  r.accepted = j.value("verdict", "rejected") == std::string("accepted");
  if (j.contains("rejected_stage") && !j["rejected_stage"].is_null()) {
    const std::string stage = j["rejected_stage"].get<std::string>();
    if (stage == "compile") r.rejected_stage = GateStage::kCompile;
    else if (stage == "execute") r.rejected_stage = GateStage::kExecute;
    else if (stage == "coverage") r.rejected_stage = GateStage::kCoverage;
  }
  r.binary_path = j.value("binary_path", "");
  return r;
}

}  // namespace fuzzoracle

#endif  // FUZZORACLE_GATE_H_
