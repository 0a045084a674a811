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
// Command-line entry point. Exit codes: 0 when the requested stage
// completed (even if individual targets failed), 1 on environment errors,
// 2 on configuration errors.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "fuzzoracle/config.hpp"
#include "fuzzoracle/pipeline.hpp"
#include "fuzzoracle/util.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEnvironment = 1;
constexpr int kExitConfig = 2;

struct CliArgs {
  std::string config_path;
  std::string workdir;
  int jobs = 0;
  bool force = false;
  std::string replay_dir;
  bool normalize_timestamps = false;
};

fuzzoracle::PipelineConfig LoadConfig(const CliArgs &args) {
  if (args.config_path.empty())
    throw fuzzoracle::ConfigError("--config is required");
  auto config = fuzzoracle::LoadPipelineConfigFile(args.config_path);
  if (!args.workdir.empty()) config.workdir = args.workdir;
  if (!args.replay_dir.empty()) {
    config.synthesis.backend_mode = fuzzoracle::BackendMode::kReplay;
    config.synthesis.replay_dir = args.replay_dir;
  }
  fuzzoracle::AbsolutizePaths(config);
  config.Validate();
  return config;
}

fuzzoracle::PipelineOptions OptionsOf(const CliArgs &args) {
  fuzzoracle::PipelineOptions options;
  options.force = args.force;
  options.jobs = args.jobs > 0
                     ? args.jobs
                     : static_cast<int>(std::thread::hardware_concurrency());
  if (options.jobs < 1) options.jobs = 1;
  if (!args.replay_dir.empty()) options.replay_dir = args.replay_dir;
  options.normalize_timestamps = args.normalize_timestamps;
  return options;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Rank, fuzz, and confirm vulnerability predictions for a C "
               "library"};
  app.require_subcommand(1);

  CliArgs args;
  app.add_option("--config", args.config_path, "Pipeline config (YAML or JSON)");
  app.add_option("--workdir", args.workdir, "Override the config's workdir");
  app.add_option("--jobs", args.jobs, "Parallel target workers (default: nproc)");
  app.add_flag("--force", args.force, "Overwrite prior stage outputs");
  app.add_option("--replay", args.replay_dir,
                 "Serve completions from recorded fixtures in this directory");
  app.add_flag("--normalize-timestamps", args.normalize_timestamps,
               "Render reports with fixed timestamps");

  auto *inventory = app.add_subcommand("inventory", "Extract the function inventory");
  auto *rank = app.add_subcommand("rank", "Score and rank fuzz targets");
  auto *synth = app.add_subcommand("synth", "Synthesize fuzz drivers");
  auto *gate = app.add_subcommand("gate", "Validate drivers (compile, smoke, coverage)");
  auto *fuzz = app.add_subcommand("fuzz", "Run fuzz campaigns on accepted harnesses");
  auto *run = app.add_subcommand("run", "Run the full pipeline end to end");
  auto *report = app.add_subcommand("report", "Assemble the report from persisted artifacts");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = LoadConfig(args);
    const auto options = OptionsOf(args);
    if (inventory->parsed()) {
      fuzzoracle::CmdInventory(config, options.force);
    } else if (rank->parsed()) {
      fuzzoracle::CmdRank(config, options.force);
    } else if (synth->parsed()) {
      fuzzoracle::CmdSynth(config, options);
    } else if (gate->parsed()) {
      fuzzoracle::CmdGate(config, options);
    } else if (fuzz->parsed()) {
      fuzzoracle::CmdFuzz(config, options);
    } else if (run->parsed()) {
      const auto result = fuzzoracle::CmdRun(config, options);
      fuzzoracle::LogInfo("run " + result.run_id + " complete; report at " +
                          (config.workdir / "report.json").string());
    } else if (report->parsed()) {
      const std::string now = fuzzoracle::NowIso8601Utc();
      fuzzoracle::CmdReport(config, options, now, now);
      fuzzoracle::LogInfo("report written to " +
                          (config.workdir / "report.json").string());
    }
    return kExitOk;
  } catch (const fuzzoracle::ConfigError &e) {
    fuzzoracle::LogError(e.what());
    return kExitConfig;
  } catch (const fuzzoracle::MalformedSpec &e) {
    fuzzoracle::LogError(e.what());
    return kExitConfig;
  } catch (const fuzzoracle::NoSourcesFound &e) {
    fuzzoracle::LogError(e.what());
    return kExitConfig;
  } catch (const fuzzoracle::EmptyInventory &e) {
    fuzzoracle::LogError(e.what());
    return kExitConfig;
  } catch (const fuzzoracle::EnvironmentError &e) {
    fuzzoracle::LogError(e.what());
    return kExitEnvironment;
  } catch (const std::exception &e) {
    fuzzoracle::LogError(e.what());
    return kExitEnvironment;
  }
}
