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
// Pipeline orchestration: staged commands over persisted JSON artifacts.
// Every stage consumes only the prior stage's files, per-target failures
// never abort the run, and completed targets are skipped on re-run.

#ifndef FUZZORACLE_PIPELINE_H_
#define FUZZORACLE_PIPELINE_H_

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "fuzzoracle/backend.hpp"
#include "fuzzoracle/campaign.hpp"
#include "fuzzoracle/config.hpp"
#include "fuzzoracle/gate.hpp"
#include "fuzzoracle/inventory.hpp"
#include "fuzzoracle/oracle.hpp"
#include "fuzzoracle/report.hpp"
#include "fuzzoracle/synthesis.hpp"
#include "fuzzoracle/util.hpp"

namespace fuzzoracle {

struct PipelineOptions {
  bool force = false;
  int jobs = 1;
  std::optional<std::filesystem::path> replay_dir;  // overrides config
  bool normalize_timestamps = false;
};

// --- Workdir layout -----------------------------------------------------------

inline std::filesystem::path InventoryPath(const PipelineConfig &c) {
  return c.workdir / "inventory.json";
}
inline std::filesystem::path TargetsPath(const PipelineConfig &c) {
  return c.workdir / "targets.json";
}
inline std::filesystem::path TargetDir(const PipelineConfig &c,
                                       const std::string &name) {
  return c.workdir / "targets" / name;
}
inline std::filesystem::path AttemptDir(const std::filesystem::path &target_dir,
                                        int attempt) {
  return target_dir / ("attempt" + std::to_string(attempt));
}

inline void RefuseOverwrite(const std::filesystem::path &artifact, bool force) {
  if (!force && std::filesystem::exists(artifact))
    throw ConfigError(artifact.string() +
                      " already exists; pass --force to overwrite");
}

// --- Stage: inventory -----------------------------------------------------------

// Scans the project's source directories and signature specs into
// FunctionRecords, minus the exclusion list.
inline std::vector<FunctionRecord> BuildInventory(const PipelineConfig &config) {
  std::vector<std::filesystem::path> sources;
  for (const auto &dir : config.project.source_dirs) {
    if (!std::filesystem::exists(dir)) continue;
    for (const auto &entry :
         std::filesystem::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".c")
        sources.push_back(std::filesystem::absolute(entry.path()));
    }
  }
  std::sort(sources.begin(), sources.end());
  if (sources.empty() && config.project.signature_specs.empty())
    throw NoSourcesFound("no .c files under the configured source_dirs");

  std::vector<FunctionRecord> records;
  for (const auto &path : sources) {
    SourceUnit unit{path, ReadFile(path), Language::kC};
    try {
      auto extracted = ExtractFunctions(unit);
      records.insert(records.end(), extracted.begin(), extracted.end());
    } catch (const UnparsableSource &e) {
      LogWarn(std::string("skipping unparsable source: ") + e.what());
    }
  }
  for (const auto &spec_path : config.project.signature_specs) {
    try {
      records.push_back(SpecToRecord(LoadSignatureSpecFile(spec_path)));
    } catch (const MalformedSpec &e) {
      LogWarn("skipping malformed signature spec " + spec_path.string() +
              ": " + e.what());
    }
  }

  std::vector<FunctionRecord> kept;
  for (auto &rec : records) {
    const bool excluded =
        std::find(config.project.exclusion_list.begin(),
                  config.project.exclusion_list.end(),
                  rec.name) != config.project.exclusion_list.end();
    if (!excluded) kept.push_back(std::move(rec));
  }
  return kept;
}

inline std::vector<FunctionRecord> CmdInventory(const PipelineConfig &config,
                                                bool force) {
  RefuseOverwrite(InventoryPath(config), force);
  auto records = BuildInventory(config);
  nlohmann::ordered_json functions = nlohmann::ordered_json::array();
  for (const auto &r : records) functions.push_back(RecordToJson(r));
  WriteFile(InventoryPath(config),
            nlohmann::ordered_json{{"functions", functions}}.dump(2) + "\n");
  LogInfo("inventory: " + std::to_string(records.size()) + " functions -> " +
          InventoryPath(config).string());
  return records;
}

inline std::vector<FunctionRecord> LoadInventory(const PipelineConfig &config) {
  if (!std::filesystem::exists(InventoryPath(config)))
    throw ConfigError("missing " + InventoryPath(config).string() +
                      "; run the inventory stage first");
  auto doc = nlohmann::json::parse(ReadFile(InventoryPath(config)));
  std::vector<FunctionRecord> records;
  for (const auto &f : doc.at("functions")) records.push_back(RecordFromJson(f));
  return records;
}

// --- Stage: rank ------------------------------------------------------------------

// CWE hints declared in signature specs override predicted CWEs.
inline std::map<std::string, std::vector<std::string>> CweHintsOf(
    const PipelineConfig &config) {
  std::map<std::string, std::vector<std::string>> hints;
  for (const auto &spec_path : config.project.signature_specs) {
    try {
      auto spec = LoadSignatureSpecFile(spec_path);
      if (!spec.cwe_hints.empty()) hints[spec.function_name] = spec.cwe_hints;
    } catch (const MalformedSpec &) {
    }
  }
  return hints;
}

inline std::vector<TargetCandidate> CmdRank(const PipelineConfig &config,
                                            bool force) {
  RefuseOverwrite(TargetsPath(config), force);
  auto records = LoadInventory(config);
  auto targets = RankTargets(records, config.oracle, CweHintsOf(config));
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto &t : targets) arr.push_back(CandidateToJson(t));
  WriteFile(TargetsPath(config),
            nlohmann::ordered_json{{"targets", arr}}.dump(2) + "\n");
  LogInfo("rank: " + std::to_string(targets.size()) + " targets -> " +
          TargetsPath(config).string());
  return targets;
}

inline std::vector<TargetCandidate> LoadTargets(const PipelineConfig &config) {
  if (!std::filesystem::exists(TargetsPath(config)))
    throw ConfigError("missing " + TargetsPath(config).string() +
                      "; run the rank stage first");
  auto doc = nlohmann::json::parse(ReadFile(TargetsPath(config)));
  std::vector<TargetCandidate> targets;
  for (const auto &t : doc.at("targets"))
    targets.push_back(CandidateFromJson(t));
  return targets;
}

// --- Backends ------------------------------------------------------------------------

inline std::unique_ptr<GenerationBackend> MakeBackend(
    const PipelineConfig &config, const PipelineOptions &options) {
  auto mode = config.synthesis.backend_mode;
  if (options.replay_dir.has_value())
    return std::make_unique<ReplayBackend>(*options.replay_dir);
  switch (mode) {
    case BackendMode::kTemplate:
      return nullptr;  // deterministic synthesis, no backend process
    case BackendMode::kReplay:
      return std::make_unique<ReplayBackend>(*config.synthesis.replay_dir);
    case BackendMode::kHttp:
      return std::make_unique<HttpBackend>(config.synthesis.http);
  }
  return nullptr;
}

inline PromptTemplate LoadTemplate(const PipelineConfig &config) {
  if (config.synthesis.template_path.has_value())
    return LoadPromptTemplateFile(*config.synthesis.template_path);
  return DefaultPromptTemplate();
}

// --- Per-target execution ---------------------------------------------------------------

namespace pipeline_detail {

// Clears prior campaign state so the engine starts from an empty work
// directory (corpus and crash index included).
inline void ResetCampaignDirs(const std::filesystem::path &target_dir) {
  std::error_code ec;
  std::filesystem::remove_all(target_dir / "corpus", ec);
  std::filesystem::remove_all(target_dir / "crashes", ec);
  std::filesystem::remove_all(target_dir / "gcov-scratch", ec);
  std::filesystem::remove_all(target_dir / "cov", ec);
  if (std::filesystem::exists(target_dir)) {
    for (const auto &e : std::filesystem::directory_iterator(target_dir)) {
      const std::string name = e.path().filename().string();
      if (name.rfind("crash-", 0) == 0 || name.rfind("leak-", 0) == 0 ||
          name.rfind("oom-", 0) == 0 || name.rfind("timeout-", 0) == 0)
        std::filesystem::remove(e.path(), ec);
    }
  }
}

inline std::string GateFailureDiagnostics(const GateReport &gate) {
  if (!gate.rejected_stage.has_value()) return "";
  switch (*gate.rejected_stage) {
    case GateStage::kCompile:
      return gate.compile_diagnostics;
    case GateStage::kExecute:
      return "the harness failed on trivial seeds (" +
             std::string(SmokeResultName(gate.smoke_run)) + "):\n" +
             gate.smoke_diagnostics;
    case GateStage::kCoverage:
      return "the harness compiled and ran but did not reach the target "
             "function (coverage below threshold)";
  }
  return "";
}

}  // namespace pipeline_detail

// Runs one ranked target through synthesis -> gate -> campaign with the
// refinement loop. Persists every artifact under the target's directory.
// Returns the target's report; never throws except for ToolchainMissing.
inline TargetReport RunTarget(const PipelineConfig &config,
                              const TargetCandidate &target,
                              const PromptTemplate &tmpl,
                              GenerationBackend *backend) {
  const auto target_dir = TargetDir(config, target.record.name);
  std::filesystem::create_directories(target_dir);

  TargetReport report;
  report.candidate = target;
  report.confirmation.target_function = target.record.name;
  report.confirmation.outcome = ConfirmationOutcome::kUnconfirmed;

  GenerationSession session;
  session.target = target;
  session.max_attempts = config.synthesis.max_attempts;
  session.temperature = config.synthesis.http.temperature;

  const bool template_mode = (backend == nullptr);

  try {
    while (static_cast<int>(session.history.size()) < session.max_attempts) {
      const Prompt prompt = RefinePrompt(session, tmpl);
      const auto attempt_dir = AttemptDir(target_dir, prompt.attempt);
      std::filesystem::create_directories(attempt_dir);
      WriteFile(attempt_dir / "prompt.txt", prompt.rendered_text);

      // Synthesis: backend completion with template fallback, or pure
      // template synthesis when no backend is configured.
      DriverCandidate candidate;
      bool have_candidate = false;
      if (!template_mode) {
        try {
          std::string raw;
          candidate = GenerateDriver(prompt, *backend, &raw);
          WriteFile(attempt_dir / "raw_reply.txt", raw);
          have_candidate = true;
        } catch (const BackendUnavailable &e) {
          LogWarn("backend unavailable for '" + target.record.name +
                  "': " + e.what() + "; trying template synthesis");
        } catch (const EmptyCompletion &e) {
          AttemptOutcome failed;
          failed.prompt = prompt;
          failed.gate_passed = false;
          failed.failure_diagnostics = e.what();
          session.history.push_back(std::move(failed));
          continue;
        }
      }
      if (!have_candidate) {
        try {
          candidate = TemplateDriver(target, prompt.attempt);
        } catch (const UnsupportedSignature &e) {
          report.confirmation.note =
              std::string("no driver could be synthesized: ") + e.what();
          break;
        }
      }
      WriteFile(attempt_dir / "driver.cc", candidate.source_text);

      // Gate.
      GateReport gate = Gate(candidate, config.gate, target.record,
                             attempt_dir / "build");
      WriteFile(attempt_dir / "gate.json", GateReportToJson(gate).dump(2) + "\n");
      report.gate_reports.push_back(gate);

      AttemptOutcome outcome;
      outcome.prompt = prompt;
      outcome.candidate = candidate;
      outcome.gate_passed = gate.accepted;
      if (!gate.accepted) {
        outcome.failure_diagnostics =
            pipeline_detail::GateFailureDiagnostics(gate);
        session.history.push_back(std::move(outcome));
        continue;
      }

      // Campaign.
      pipeline_detail::ResetCampaignDirs(target_dir);
      const FunctionRecord rec = target.record;
      const BuildConfig gate_cfg = config.gate;
      const std::filesystem::path binary = gate.binary_path;
      CoverageProbe probe =
          [&rec, &gate_cfg, &binary,
           &target_dir](const std::vector<std::filesystem::path> &corpus) {
            return MeasureCoverageFiles(binary, corpus, rec, gate_cfg,
                                        target_dir / "cov");
          };
      CampaignResult campaign =
          RunCampaign(binary, config.campaign, target_dir, rec.name, probe);
      WriteFile(target_dir / "campaign.json",
                CampaignResultToJson(campaign).dump(2) + "\n");
      nlohmann::ordered_json index = nlohmann::ordered_json::array();
      for (const auto &c : campaign.crashes) index.push_back(CrashRecordToJson(c));
      WriteFile(target_dir / "crashes" / "index.json", index.dump(2) + "\n");
      report.campaign = campaign;

      outcome.campaign_ran = true;
      outcome.campaign_found_crash =
          campaign.status == CampaignStatus::kCrashFound;
      session.history.push_back(outcome);

      report.confirmation = ConfirmVerdict(target.verdict, campaign);
      if (campaign.status == CampaignStatus::kEngineError)
        report.confirmation.note = "engine error: " + campaign.engine_diagnostics;

      if (campaign.status == CampaignStatus::kCrashFound) break;
      if (campaign.status == CampaignStatus::kEngineError) break;
      // Crash-free: refine only when a backend can act on the new
      // instruction; template synthesis is deterministic, so retrying it
      // would reproduce the same driver.
      if (template_mode) break;
      if (ComposeRefinementExtra(session).empty()) break;
    }
  } catch (const ToolchainMissing &) {
    throw;  // environment failure aborts the whole run
  } catch (const std::exception &e) {
    LogError("target '" + target.record.name + "' failed: " + e.what());
    if (report.confirmation.note.empty())
      report.confirmation.note = std::string("pipeline error: ") + e.what();
  }

  report.attempts_used = static_cast<int>(session.history.size());
  WriteFile(target_dir / "confirmation.json",
            ConfirmationToJson(report.confirmation).dump(2) + "\n");
  return report;
}

// Rebuilds one target's report purely from persisted artifacts.
inline TargetReport AssembleTargetReport(const PipelineConfig &config,
                                         const TargetCandidate &target) {
  const auto target_dir = TargetDir(config, target.record.name);
  TargetReport report;
  report.candidate = target;
  for (int attempt = 1; attempt <= config.synthesis.max_attempts; attempt++) {
    const auto dir = AttemptDir(target_dir, attempt);
    if (!std::filesystem::exists(dir)) break;
    report.attempts_used = attempt;
    const auto gate_path = dir / "gate.json";
    if (std::filesystem::exists(gate_path))
      report.gate_reports.push_back(
          GateReportFromJson(nlohmann::json::parse(ReadFile(gate_path))));
  }
  const auto campaign_path = target_dir / "campaign.json";
  if (std::filesystem::exists(campaign_path))
    report.campaign =
        CampaignResultFromJson(nlohmann::json::parse(ReadFile(campaign_path)));
  const auto confirmation_path = target_dir / "confirmation.json";
  if (std::filesystem::exists(confirmation_path)) {
    report.confirmation =
        ConfirmationFromJson(nlohmann::json::parse(ReadFile(confirmation_path)));
  } else {
    report.confirmation.target_function = target.record.name;
    report.confirmation.outcome = ConfirmationOutcome::kUnconfirmed;
    report.confirmation.note = "target has not completed the pipeline";
  }
  return report;
}

inline bool TargetCompleted(const PipelineConfig &config,
                            const TargetCandidate &target) {
  return std::filesystem::exists(TargetDir(config, target.record.name) /
                                 "confirmation.json");
}

// --- Stage commands over persisted artifacts -----------------------------------------

// Synthesizes first-attempt drivers for every ranked target.
inline void CmdSynth(const PipelineConfig &config,
                     const PipelineOptions &options) {
  auto targets = LoadTargets(config);
  auto tmpl = LoadTemplate(config);
  auto backend = MakeBackend(config, options);
  for (const auto &target : targets) {
    const auto attempt_dir = AttemptDir(TargetDir(config, target.record.name), 1);
    RefuseOverwrite(attempt_dir / "driver.cc", options.force);
    const Prompt prompt = BuildPrompt(target, tmpl, "", 1);
    std::filesystem::create_directories(attempt_dir);
    WriteFile(attempt_dir / "prompt.txt", prompt.rendered_text);
    try {
      DriverCandidate candidate;
      if (backend != nullptr) {
        std::string raw;
        candidate = GenerateDriver(prompt, *backend, &raw);
        WriteFile(attempt_dir / "raw_reply.txt", raw);
      } else {
        candidate = TemplateDriver(target, 1);
      }
      WriteFile(attempt_dir / "driver.cc", candidate.source_text);
      LogInfo("synth: driver for '" + target.record.name + "' -> " +
              (attempt_dir / "driver.cc").string());
    } catch (const std::exception &e) {
      LogWarn("synth: no driver for '" + target.record.name + "': " + e.what());
    }
  }
}

// Gates every synthesized first-attempt driver.
inline void CmdGate(const PipelineConfig &config,
                    const PipelineOptions &options) {
  auto targets = LoadTargets(config);
  for (const auto &target : targets) {
    const auto attempt_dir = AttemptDir(TargetDir(config, target.record.name), 1);
    const auto driver_path = attempt_dir / "driver.cc";
    if (!std::filesystem::exists(driver_path)) {
      LogWarn("gate: no driver for '" + target.record.name + "'; skipping");
      continue;
    }
    RefuseOverwrite(attempt_dir / "gate.json", options.force);
    DriverCandidate candidate;
    candidate.source_text = ReadFile(driver_path);
    candidate.target_function = target.record.name;
    candidate.provenance = config.synthesis.backend_mode == BackendMode::kTemplate
                               ? Provenance::kTemplate
                               : Provenance::kLlm;
    GateReport gate =
        Gate(candidate, config.gate, target.record, attempt_dir / "build");
    WriteFile(attempt_dir / "gate.json", GateReportToJson(gate).dump(2) + "\n");
    LogInfo("gate: '" + target.record.name + "' " +
            (gate.accepted ? "accepted" : "rejected"));
  }
}

// Runs campaigns for every gate-accepted harness.
inline void CmdFuzz(const PipelineConfig &config,
                    const PipelineOptions &options) {
  auto targets = LoadTargets(config);
  for (const auto &target : targets) {
    const auto target_dir = TargetDir(config, target.record.name);
    const auto gate_path = AttemptDir(target_dir, 1) / "gate.json";
    if (!std::filesystem::exists(gate_path)) {
      LogWarn("fuzz: '" + target.record.name + "' has no gate report; skipping");
      continue;
    }
    if (std::filesystem::exists(target_dir / "confirmation.json") &&
        !options.force) {
      LogInfo("fuzz: '" + target.record.name + "' already confirmed; skipping");
      continue;
    }
    GateReport gate =
        GateReportFromJson(nlohmann::json::parse(ReadFile(gate_path)));
    Confirmation confirmation;
    confirmation.target_function = target.record.name;
    if (!gate.accepted) {
      confirmation.note = "harness was rejected by the gate";
    } else {
      pipeline_detail::ResetCampaignDirs(target_dir);
      const FunctionRecord rec = target.record;
      const BuildConfig gate_cfg = config.gate;
      const std::filesystem::path binary = gate.binary_path;
      CoverageProbe probe =
          [&rec, &gate_cfg, &binary,
           &target_dir](const std::vector<std::filesystem::path> &corpus) {
            return MeasureCoverageFiles(binary, corpus, rec, gate_cfg,
                                        target_dir / "cov");
          };
      CampaignResult campaign =
          RunCampaign(binary, config.campaign, target_dir, rec.name, probe);
      WriteFile(target_dir / "campaign.json",
                CampaignResultToJson(campaign).dump(2) + "\n");
      nlohmann::ordered_json index = nlohmann::ordered_json::array();
      for (const auto &c : campaign.crashes)
        index.push_back(CrashRecordToJson(c));
      WriteFile(target_dir / "crashes" / "index.json", index.dump(2) + "\n");
      confirmation = ConfirmVerdict(target.verdict, campaign);
      LogInfo("fuzz: '" + target.record.name + "' " +
              CampaignStatusName(campaign.status));
    }
    WriteFile(target_dir / "confirmation.json",
              ConfirmationToJson(confirmation).dump(2) + "\n");
  }
}

// --- Report and full run ---------------------------------------------------------------

inline std::string RunIdOf(const PipelineConfig &config) {
  return "run-" + Fnv1a64Hex(PipelineConfigToJson(config).dump());
}

inline PipelineReport CmdReport(const PipelineConfig &config,
                                const PipelineOptions &options,
                                const std::string &started_at,
                                const std::string &ended_at) {
  auto targets = LoadTargets(config);
  PipelineReport report;
  report.run_id = RunIdOf(config);
  report.config_snapshot = PipelineConfigToJson(config);
  report.started_at = started_at;
  report.ended_at = ended_at;
  for (const auto &target : targets)
    report.targets.push_back(AssembleTargetReport(config, target));
  FinalizeMetrics(report);
  WriteFile(config.workdir / "report.json",
            RenderReport(report, ReportFormat::kJson,
                         options.normalize_timestamps));
  WriteFile(config.workdir / "report.md",
            RenderReport(report, ReportFormat::kMarkdown,
                         options.normalize_timestamps));
  return report;
}

// Full workflow: inventory -> rank -> per-target synthesis/gate/campaign ->
// report. Completed targets are skipped, so a re-run after completion only
// reassembles the report from persisted artifacts.
inline PipelineReport CmdRun(const PipelineConfig &config,
                             const PipelineOptions &options) {
  const std::string started_at = NowIso8601Utc();
  std::filesystem::create_directories(config.workdir);
  if (options.force) {
    std::error_code ec;
    std::filesystem::remove(InventoryPath(config), ec);
    std::filesystem::remove(TargetsPath(config), ec);
    std::filesystem::remove_all(config.workdir / "targets", ec);
    std::filesystem::remove(config.workdir / "report.json", ec);
    std::filesystem::remove(config.workdir / "report.md", ec);
  }

  if (!std::filesystem::exists(InventoryPath(config)))
    CmdInventory(config, /*force=*/false);
  if (!std::filesystem::exists(TargetsPath(config)))
    CmdRank(config, /*force=*/false);
  auto targets = LoadTargets(config);

  auto tmpl = LoadTemplate(config);
  auto backend = MakeBackend(config, options);

  std::vector<size_t> pending;
  for (size_t i = 0; i < targets.size(); i++) {
    if (TargetCompleted(config, targets[i])) {
      LogInfo("run: '" + targets[i].record.name +
              "' already completed; skipping");
    } else {
      pending.push_back(i);
    }
  }

  const int jobs = std::max(1, options.jobs);
  if (jobs <= 1 || pending.size() <= 1) {
    for (size_t idx : pending)
      RunTarget(config, targets[idx], tmpl, backend.get());
  } else {
    std::atomic<size_t> next{0};
    std::atomic<bool> toolchain_failed{false};
    std::mutex error_mutex;
    std::string toolchain_error;
    auto worker = [&]() {
      while (true) {
        const size_t slot = next.fetch_add(1);
        if (slot >= pending.size() || toolchain_failed.load()) return;
        try {
          RunTarget(config, targets[pending[slot]], tmpl, backend.get());
        } catch (const ToolchainMissing &e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          toolchain_failed = true;
          toolchain_error = e.what();
        }
      }
    };
    std::vector<std::thread> threads;
    const size_t n_threads =
        std::min<size_t>(static_cast<size_t>(jobs), pending.size());
    for (size_t i = 0; i < n_threads; i++) threads.emplace_back(worker);
    for (auto &t : threads) t.join();
    if (toolchain_failed) throw ToolchainMissing(toolchain_error);
  }

  return CmdReport(config, options, started_at, NowIso8601Utc());
}

}  // namespace fuzzoracle

#endif  // FUZZORACLE_PIPELINE_H_
