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
// Orchestrator tests: staged artifacts, resume, overwrite refusal, the
// end-to-end run on the toylib fixture, and the installed CLI binary.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "fuzzoracle/config.hpp"
#include "fuzzoracle/pipeline.hpp"
#include "test_support.hpp"

using namespace fuzzoracle;
using testsupport::BinDir;
using testsupport::RepoDir;
using testsupport::ScratchDir;
using testsupport::ToylibBuildDir;
using testsupport::ToylibGateConfig;

namespace {

PipelineConfig PipeConfig(const std::filesystem::path &workdir) {
  PipelineConfig config;
  config.project.name = "toylib";
  config.project.source_dirs = {RepoDir() / "fixtures" / "toylib"};
  config.project.include_dirs = {RepoDir() / "fixtures" / "toylib"};
  config.gate = ToylibGateConfig();
  config.oracle.top_k = 2;
  config.campaign.time_budget_seconds = 12;
  config.campaign.crash_cap = 1;
  config.workdir = workdir;
  return config;
}

std::string MockOracleCommand(const std::string &args) {
  return "python3 " +
         (RepoDir() / "fixtures" / "oracle" / "mock_oracle.py").string() +
         " " + args;
}

// Minimal config file for CLI tests; `extra` appends top-level sections.
std::filesystem::path WriteToylibYaml(const std::filesystem::path &dir,
                                      const std::string &extra = "") {
  const auto libdir = ToylibBuildDir();
  const auto srcdir = (RepoDir() / "fixtures" / "toylib").string();
  std::string yaml;
  yaml += "project:\n";
  yaml += "  name: toylib\n";
  yaml += "  source_dirs: [\"" + srcdir + "\"]\n";
  yaml += "  library_archive: \"" + (libdir / "libtoy.a").string() + "\"\n";
  yaml += "  include_dirs: [\"" + srcdir + "\"]\n";
  yaml += "oracle:\n";
  yaml += "  top_k: 2\n";
  yaml += "workdir: \"" + (dir / "wd").string() + "\"\n";
  yaml += extra;
  const auto path = dir / "toylib.yaml";
  WriteFile(path, yaml);
  return path;
}

CommandResult RunCli(const std::vector<std::string> &args) {
  CommandSpec spec;
  spec.argv = {(BinDir() / "fuzzoracle").string()};
  for (const auto &a : args) spec.argv.push_back(a);
  spec.timeout_seconds = 300;
  return RunCommand(spec);
}

}  // namespace

// --- Staged artifacts -------------------------------------------------------------

TEST_CASE("inventory stage extracts and persists toylib's functions") {
  const PipelineConfig config = PipeConfig(ScratchDir("pipe-inventory"));
  const auto records = CmdInventory(config, false);
  REQUIRE(records.size() == 5);
  CHECK(std::filesystem::exists(InventoryPath(config)));

  const auto loaded = LoadInventory(config);
  REQUIRE(loaded.size() == records.size());
  for (size_t i = 0; i < loaded.size(); i++)
    CHECK(RecordToJson(loaded[i]) == RecordToJson(records[i]));
}

TEST_CASE("inventory with no sources and no specs fails loudly") {
  PipelineConfig config = PipeConfig(ScratchDir("pipe-empty"));
  const auto empty_src = ScratchDir("pipe-empty-src");
  config.project.source_dirs = {empty_src};
  CHECK_THROWS_AS(CmdInventory(config, false), NoSourcesFound);
}

TEST_CASE("excluded functions never reach the inventory") {
  PipelineConfig config = PipeConfig(ScratchDir("pipe-exclude"));
  config.project.exclusion_list = {"toy_version"};
  const auto records = CmdInventory(config, false);
  CHECK(records.size() == 4);
  for (const auto &r : records) CHECK(r.name != "toy_version");
}

TEST_CASE("rank stage persists the seeded bugs as the top two targets") {
  const PipelineConfig config = PipeConfig(ScratchDir("pipe-rank"));
  CmdInventory(config, false);
  const auto targets = CmdRank(config, false);
  REQUIRE(targets.size() == 2);
  CHECK(targets[0].record.name == "toy_decode_packet");
  CHECK(targets[0].rank == 1);
  CHECK(targets[1].record.name == "toy_render_tile");
  CHECK(targets[1].rank == 2);

  const auto loaded = LoadTargets(config);
  REQUIRE(loaded.size() == 2);
  CHECK(CandidateToJson(loaded[0]) == CandidateToJson(targets[0]));
}

TEST_CASE("a top_k beyond the inventory keeps every function") {
  PipelineConfig config = PipeConfig(ScratchDir("pipe-topk"));
  config.oracle.top_k = 100;
  CmdInventory(config, false);
  CHECK(CmdRank(config, false).size() == 5);
}

TEST_CASE("rank before inventory is a configuration error") {
  const PipelineConfig config = PipeConfig(ScratchDir("pipe-norank"));
  CHECK_THROWS_AS(CmdRank(config, false), ConfigError);
}

TEST_CASE("stage outputs refuse to overwrite without force") {
  const PipelineConfig config = PipeConfig(ScratchDir("pipe-refuse"));
  CmdInventory(config, false);
  CHECK_THROWS_AS(CmdInventory(config, false), ConfigError);
  CHECK_NOTHROW(CmdInventory(config, true));

  CmdRank(config, false);
  CHECK_THROWS_AS(CmdRank(config, false), ConfigError);
  CHECK_NOTHROW(CmdRank(config, true));
}

TEST_CASE("an external oracle can reorder the ranking") {
  PipelineConfig config = PipeConfig(ScratchDir("pipe-extoracle"));
  config.oracle.w1 = 0.0;
  config.oracle.w2 = 0.0;
  config.oracle.w3 = 1.0;
  config.oracle.external_oracle_command =
      MockOracleCommand("--mode favor --name toy_version");
  CmdInventory(config, false);
  const auto targets = CmdRank(config, false);
  REQUIRE_FALSE(targets.empty());
  CHECK(targets[0].record.name == "toy_version");
  CHECK(targets[0].composite_score == 1.0);
  CHECK(targets[0].verdict.source == VerdictSource::kExternal);
}

// --- End-to-end run ---------------------------------------------------------------

TEST_CASE("a template-mode run confirms the double free and can resume") {
  PipelineConfig config = PipeConfig(ScratchDir("pipe-run"));
  config.oracle.top_k = 1;  // toy_decode_packet only
  PipelineOptions options;
  options.normalize_timestamps = true;

  const PipelineReport report = CmdRun(config, options);

  REQUIRE(report.targets.size() == 1);
  const TargetReport &t = report.targets[0];
  CHECK(t.candidate.record.name == "toy_decode_packet");
  CHECK(t.attempts_used == 1);
  REQUIRE_FALSE(t.gate_reports.empty());
  CHECK(t.gate_reports.back().accepted);
  REQUIRE(t.campaign.has_value());
  CHECK(t.campaign->status == CampaignStatus::kCrashFound);
  CHECK(t.confirmation.outcome == ConfirmationOutcome::kConfirmedMatchingCwe);
  REQUIRE(t.confirmation.matched_cwe.has_value());
  CHECK(*t.confirmation.matched_cwe == "CWE-415");
  CHECK(report.metrics.flagged_count == 1);
  CHECK(report.metrics.confirmed_matching == 1);
  REQUIRE(report.metrics.oracle_precision.has_value());
  CHECK(*report.metrics.oracle_precision == 1.0);
  CHECK(report.run_id.rfind("run-", 0) == 0);

  // Every staged artifact the run claims to persist is on disk.
  const auto tdir = TargetDir(config, "toy_decode_packet");
  for (const char *rel :
       {"attempt1/prompt.txt", "attempt1/driver.cc", "attempt1/gate.json",
        "campaign.json", "confirmation.json", "crashes/index.json"}) {
    INFO(rel);
    CHECK(std::filesystem::exists(tdir / rel));
  }
  REQUIRE(std::filesystem::exists(config.workdir / "report.json"));
  REQUIRE(std::filesystem::exists(config.workdir / "report.md"));

  SECTION("a second run resumes from persisted artifacts") {
    const std::string first_report = ReadFile(config.workdir / "report.json");
    const auto campaign_mtime =
        std::filesystem::last_write_time(tdir / "campaign.json");

    const PipelineReport again = CmdRun(config, options);

    // The completed target was skipped: no new campaign ran and the
    // normalized report is byte-identical.
    CHECK(std::filesystem::last_write_time(tdir / "campaign.json") ==
          campaign_mtime);
    CHECK(ReadFile(config.workdir / "report.json") == first_report);
    CHECK(again.run_id == report.run_id);
  }
}

TEST_CASE("a replay backend with no fixture falls back to the template") {
  PipelineConfig config = PipeConfig(ScratchDir("pipe-fallback"));
  config.oracle.top_k = 1;
  config.campaign.time_budget_seconds = 10;
  PipelineOptions options;
  options.replay_dir = ScratchDir("pipe-fallback-fixtures");  // empty

  const PipelineReport report = CmdRun(config, options);
  REQUIRE(report.targets.size() == 1);
  CHECK(report.targets[0].confirmation.outcome ==
        ConfirmationOutcome::kConfirmedMatchingCwe);
}

TEST_CASE("the staged commands compose into the same pipeline") {
  PipelineConfig config = PipeConfig(ScratchDir("pipe-staged"));
  config.oracle.top_k = 1;
  config.campaign.time_budget_seconds = 10;
  PipelineOptions options;
  options.normalize_timestamps = true;

  CmdInventory(config, false);
  CmdRank(config, false);
  CmdSynth(config, options);
  const auto attempt_dir = AttemptDir(TargetDir(config, "toy_decode_packet"), 1);
  CHECK(std::filesystem::exists(attempt_dir / "prompt.txt"));
  REQUIRE(std::filesystem::exists(attempt_dir / "driver.cc"));

  CmdGate(config, options);
  REQUIRE(std::filesystem::exists(attempt_dir / "gate.json"));
  const GateReport gate = GateReportFromJson(
      nlohmann::json::parse(ReadFile(attempt_dir / "gate.json")));
  CHECK(gate.accepted);

  CmdFuzz(config, options);
  const auto tdir = TargetDir(config, "toy_decode_packet");
  REQUIRE(std::filesystem::exists(tdir / "confirmation.json"));
  const Confirmation conf = ConfirmationFromJson(
      nlohmann::json::parse(ReadFile(tdir / "confirmation.json")));
  CHECK(conf.outcome == ConfirmationOutcome::kConfirmedMatchingCwe);

  const PipelineReport report =
      CmdReport(config, options, NowIso8601Utc(), NowIso8601Utc());
  CHECK(report.metrics.flagged_count == 1);
  CHECK(report.metrics.confirmed_matching == 1);
  CHECK(std::filesystem::exists(config.workdir / "report.json"));
}

TEST_CASE("run ids depend only on the configuration") {
  const auto workdir = ScratchDir("pipe-runid");
  const PipelineConfig a = PipeConfig(workdir);
  const PipelineConfig b = PipeConfig(workdir);
  CHECK(RunIdOf(a) == RunIdOf(b));

  PipelineConfig c = PipeConfig(workdir);
  c.oracle.top_k = 4;
  CHECK(RunIdOf(c) != RunIdOf(a));
}

// --- The installed CLI ------------------------------------------------------------

TEST_CASE("the CLI exits with the configuration error code without a config") {
  const auto res = RunCli({"inventory"});
  CHECK(res.exit_code == 2);
}

TEST_CASE("the CLI runs staged subcommands and honours force") {
  const auto dir = ScratchDir("cli-stages");
  const auto cfg = WriteToylibYaml(dir);

  const auto first = RunCli({"--config", cfg.string(), "inventory"});
  INFO(first.std_err);
  CHECK(first.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "wd" / "inventory.json"));

  // Refusal to overwrite is a configuration error; force clears it.
  CHECK(RunCli({"--config", cfg.string(), "inventory"}).exit_code == 2);
  CHECK(RunCli({"--config", cfg.string(), "--force", "inventory"}).exit_code ==
        0);

  CHECK(RunCli({"--config", cfg.string(), "rank"}).exit_code == 0);
  CHECK(std::filesystem::exists(dir / "wd" / "targets.json"));
}

TEST_CASE("the CLI workdir flag overrides the configured workdir") {
  const auto dir = ScratchDir("cli-workdir");
  const auto cfg = WriteToylibYaml(dir);
  const auto override_wd = (dir / "elsewhere").string();
  const auto res =
      RunCli({"--config", cfg.string(), "--workdir", override_wd, "inventory"});
  INFO(res.std_err);
  CHECK(res.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "elsewhere" / "inventory.json"));
  CHECK_FALSE(std::filesystem::exists(dir / "wd" / "inventory.json"));
}

TEST_CASE("a missing toolchain is an environment error at the CLI") {
  const auto dir = ScratchDir("cli-toolchain");
  const auto cfg = WriteToylibYaml(
      dir,
      "gate:\n  compiler_command: \"/nonexistent/cc {source} -o {output}\"\n"
      "campaign:\n  time_budget_seconds: 5\n");
  const auto res = RunCli({"--config", cfg.string(), "run"});
  CHECK(res.exit_code == 1);
}

TEST_CASE("a full CLI run reports the seeded bugs") {
  const auto dir = ScratchDir("cli-run");
  const auto srcdir = (RepoDir() / "fixtures" / "toylib").string();
  const auto libdir = ToylibBuildDir();
  std::string yaml;
  yaml += "project:\n";
  yaml += "  name: toylib\n";
  yaml += "  source_dirs: [\"" + srcdir + "\"]\n";
  yaml += "  library_archive: \"" + (libdir / "libtoy.a").string() + "\"\n";
  yaml += "  include_dirs: [\"" + srcdir + "\"]\n";
  yaml += "oracle:\n";
  yaml += "  top_k: 1\n";
  yaml += "campaign:\n";
  yaml += "  time_budget_seconds: 20\n";
  yaml += "  crash_cap: 1\n";
  yaml += "workdir: \"" + (dir / "wd").string() + "\"\n";
  const auto cfg = dir / "toylib.yaml";
  WriteFile(cfg, yaml);

  const auto res = RunCli({"--config", cfg.string(), "run"});
  INFO(res.std_err);
  REQUIRE(res.exit_code == 0);

  const auto report = nlohmann::json::parse(ReadFile(dir / "wd" / "report.json"));
  CHECK(report.at("schema_version") == "1");
  REQUIRE(report.at("targets").size() == 1);
  CHECK(report["targets"][0]["confirmation"]["outcome"] ==
        "confirmed_matching_cwe");
  CHECK(report["targets"][0]["confirmation"]["matched_cwe"] == "CWE-415");

  // The report subcommand reassembles the same targets from disk.
  const auto rerender = RunCli({"--config", cfg.string(), "report"});
  CHECK(rerender.exit_code == 0);
}
