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
// Shared test plumbing: fixture paths, the prebuilt toylib archive, and
// scratch directories under the build tree.

#ifndef FUZZORACLE_TESTS_TEST_SUPPORT_H_
#define FUZZORACLE_TESTS_TEST_SUPPORT_H_

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "fuzzoracle/gate.hpp"
#include "fuzzoracle/inventory.hpp"
#include "fuzzoracle/subprocess.hpp"
#include "fuzzoracle/util.hpp"

namespace testsupport {

inline std::filesystem::path RepoDir() {
  return std::filesystem::path(FUZZORACLE_REPO_DIR);
}

inline std::filesystem::path BinDir() {
  return std::filesystem::path(FUZZORACLE_BINARY_DIR);
}

// Fresh empty scratch directory under the build tree.
inline std::filesystem::path ScratchDir(const std::string &label) {
  static std::atomic<int> counter{0};
  const auto dir = BinDir() / "scratch" /
                   (label + "-" + std::to_string(counter.fetch_add(1)));
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  std::filesystem::create_directories(dir);
  return dir;
}

// Builds the instrumented toylib archive once per build tree; later calls
// reuse it. Returns the directory containing libtoy.a and toylib.gcno.
inline std::filesystem::path ToylibBuildDir() {
  const auto dir = BinDir() / "toylib_fixture";
  if (std::filesystem::exists(dir / "libtoy.a")) return dir;
  fuzzoracle::CommandSpec spec;
  spec.argv = {"sh",
               (RepoDir() / "fixtures" / "toylib" / "build_toylib.sh").string(),
               dir.string()};
  spec.timeout_seconds = 120;
  auto res = fuzzoracle::RunCommand(spec);
  if (!res.ok())
    throw std::runtime_error("toylib fixture build failed: " + res.std_err);
  return dir;
}

// Gate build config wired to the toylib fixture archive.
inline fuzzoracle::BuildConfig ToylibGateConfig() {
  const auto libdir = ToylibBuildDir();
  fuzzoracle::BuildConfig config;
  config.library_build_dir = libdir;
  config.library_archives = {(libdir / "libtoy.a").string()};
  config.include_dirs = {RepoDir() / "fixtures" / "toylib"};
  return config;
}

inline std::vector<fuzzoracle::FunctionRecord> ToylibRecords() {
  const auto path = RepoDir() / "fixtures" / "toylib" / "toylib.c";
  fuzzoracle::SourceUnit unit{path, fuzzoracle::ReadFile(path),
                              fuzzoracle::Language::kC};
  return fuzzoracle::ExtractFunctions(unit);
}

inline fuzzoracle::FunctionRecord ToylibRecord(const std::string &name) {
  for (auto &rec : ToylibRecords())
    if (rec.name == name) return rec;
  throw std::runtime_error("no toylib function named " + name);
}

struct QuietLogs {
  QuietLogs() { fuzzoracle::SetLogQuiet(true); }
};
inline QuietLogs quiet_logs_instance;

}  // namespace testsupport

#endif  // FUZZORACLE_TESTS_TEST_SUPPORT_H_
