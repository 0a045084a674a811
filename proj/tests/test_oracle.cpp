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

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include "fuzzoracle/oracle.hpp"
#include "test_support.hpp"

using namespace fuzzoracle;
using testsupport::RepoDir;

namespace {

FunctionRecord MakeRecord(const std::string &name, const std::string &body,
                          int complexity) {
  FunctionRecord r;
  r.name = name;
  r.return_type = "int";
  r.body = body;
  r.cyclomatic_complexity = complexity;
  return r;
}

std::string MockOracleCommand(const std::string &args) {
  return "python3 " +
         (RepoDir() / "fixtures" / "oracle" / "mock_oracle.py").string() + " " +
         args;
}

nlohmann::json HandRankedExpectation() {
  return nlohmann::json::parse(
      ReadFile(RepoDir() / "fixtures" / "toylib" / "expected_inventory.json"))
      .at("hand_ranked_oracle");
}

}  // namespace

TEST_CASE("heuristic1 thresholds and name substrings") {
  OracleConfig config;
  CHECK(Heuristic1(MakeRecord("parse_header", "{}", 12), config));
  CHECK_FALSE(Heuristic1(MakeRecord("parse_header", "{}", 2), config));
  CHECK_FALSE(Heuristic1(MakeRecord("gdImageWebpPtr", "{}", 20), config));
  CHECK(Heuristic1(MakeRecord("PARSE_loud", "{}", 10), config));
}

TEST_CASE("lexical score of a featureless body is zero") {
  auto [score, cwes] = LexicalVulnScore(MakeRecord("f", "{ return a + b; }", 1));
  CHECK(score == 0.0);
  CHECK(cwes.empty());
}

TEST_CASE("double free on the same expression scores 1 - exp(-0.5)") {
  auto [score, cwes] =
      LexicalVulnScore(MakeRecord("f", "{ free(p); x = 1; free(p); }", 1));
  CHECK(score == Catch::Approx(1.0 - std::exp(-0.5)).margin(1e-12));
  REQUIRE_FALSE(cwes.empty());
  CHECK(std::find(cwes.begin(), cwes.end(), "CWE-415") != cwes.end());
}

TEST_CASE("toylib lexical scores match the hand-computed expectation") {
  const auto expected = HandRankedExpectation().at("lexical_scores");
  for (const auto &rec : testsupport::ToylibRecords()) {
    auto [score, cwes] = LexicalVulnScore(rec);
    INFO("function " << rec.name);
    CHECK(score ==
          Catch::Approx(expected.at(rec.name).get<double>()).margin(1e-12));
  }
  const auto predicted = HandRankedExpectation().at("predicted_cwes");
  auto decode = LexicalVulnScore(testsupport::ToylibRecord("toy_decode_packet"));
  CHECK(decode.second ==
        predicted.at("toy_decode_packet").get<std::vector<std::string>>());
  auto render = LexicalVulnScore(testsupport::ToylibRecord("toy_render_tile"));
  CHECK(render.second ==
        predicted.at("toy_render_tile").get<std::vector<std::string>>());
}

TEST_CASE("seeded functions outscore every benign function") {
  double worst_seeded = 1.0, best_benign = 0.0;
  for (const auto &rec : testsupport::ToylibRecords()) {
    const double score = LexicalVulnScore(rec).first;
    if (rec.name == "toy_decode_packet" || rec.name == "toy_render_tile")
      worst_seeded = std::min(worst_seeded, score);
    else
      best_benign = std::max(best_benign, score);
  }
  CHECK(worst_seeded > best_benign);
}

TEST_CASE("external oracle round-trip with a canned reply") {
  OracleConfig config;
  config.external_oracle_command =
      MockOracleCommand("--mode canned --score 0.9 --cwe CWE-415");
  config.top_k = 10;
  auto targets = RankTargets(testsupport::ToylibRecords(), config);
  REQUIRE(targets.size() == 5);
  for (const auto &t : targets) {
    CHECK(t.verdict.source == VerdictSource::kExternal);
    CHECK(t.verdict.score == Catch::Approx(0.9));
    CHECK(t.verdict.predicted_cwes == std::vector<std::string>{"CWE-415"});
  }
}

TEST_CASE("oracle that exits immediately falls back to the builtin") {
  OracleConfig config;
  config.external_oracle_command = MockOracleCommand("--mode die");
  config.top_k = 10;
  auto targets = RankTargets(testsupport::ToylibRecords(), config);
  REQUIRE(targets.size() == 5);  // fallback safety: nothing dropped
  for (const auto &t : targets)
    CHECK(t.verdict.source == VerdictSource::kBuiltinLexical);
}

TEST_CASE("garbage replies fall back to the builtin") {
  OracleConfig config;
  config.external_oracle_command = MockOracleCommand("--mode garbage");
  config.top_k = 10;
  auto targets = RankTargets(testsupport::ToylibRecords(), config);
  REQUIRE(targets.size() == 5);
  for (const auto &t : targets)
    CHECK(t.verdict.source == VerdictSource::kBuiltinLexical);
}

TEST_CASE("silent oracle times out and falls back") {
  OracleConfig config;
  config.external_oracle_command = MockOracleCommand("--mode silent");
  config.external_oracle_timeout_seconds = 1;
  config.top_k = 1;
  std::vector<FunctionRecord> one = {testsupport::ToylibRecord("toy_version")};
  auto targets = RankTargets(one, config);
  REQUIRE(targets.size() == 1);
  CHECK(targets[0].verdict.source == VerdictSource::kBuiltinLexical);
}

TEST_CASE("out-of-range score is a protocol error") {
  LineProtocolProcess proc(SubstituteCommandTemplate(
      MockOracleCommand("--mode canned --score 1.7"), {}));
  OracleConfig config;
  CHECK_THROWS_AS(
      ExternalOracleQuery(proc, testsupport::ToylibRecord("toy_version"),
                          config),
      OracleProtocolError);
  proc.Shutdown();
}

TEST_CASE("ranking matches the hand-computed default-weight ordering") {
  OracleConfig config;
  config.top_k = 10;
  auto targets = RankTargets(testsupport::ToylibRecords(), config);
  const auto expected = HandRankedExpectation();
  const auto order =
      expected.at("default_weights_order").get<std::vector<std::string>>();
  const auto scores =
      expected.at("default_weights_scores").get<std::vector<double>>();
  REQUIRE(targets.size() == order.size());
  for (size_t i = 0; i < order.size(); i++) {
    INFO("rank " << i + 1);
    CHECK(targets[i].record.name == order[i]);
    CHECK(targets[i].composite_score == Catch::Approx(scores[i]).margin(1e-12));
    CHECK(targets[i].rank == static_cast<int>(i) + 1);
  }
}

TEST_CASE("weights (1,0,0) rank by heuristic1 with the tie-break chain") {
  OracleConfig config;
  config.w1 = 1.0;
  config.w2 = 0.0;
  config.w3 = 0.0;
  config.top_k = 10;
  auto targets = RankTargets(testsupport::ToylibRecords(), config);
  const auto order = HandRankedExpectation()
                         .at("h1_only_weights_order")
                         .get<std::vector<std::string>>();
  REQUIRE(targets.size() == order.size());
  for (size_t i = 0; i < order.size(); i++) {
    INFO("rank " << i + 1);
    CHECK(targets[i].record.name == order[i]);
  }
}

TEST_CASE("weights (0,0,1) order equals heuristic3 order") {
  OracleConfig config;
  config.w1 = 0.0;
  config.w2 = 0.0;
  config.w3 = 1.0;
  config.top_k = 10;
  auto targets = RankTargets(testsupport::ToylibRecords(), config);
  for (size_t i = 1; i < targets.size(); i++)
    CHECK(targets[i - 1].verdict.heuristic3_score >=
          targets[i].verdict.heuristic3_score);
  CHECK(targets[0].record.name == "toy_decode_packet");
}

TEST_CASE("favoring oracle with pure-ML weights promotes its pick to rank 1") {
  OracleConfig config;
  config.w1 = 0.0;
  config.w2 = 0.0;
  config.w3 = 1.0;
  config.top_k = 10;
  config.external_oracle_command =
      MockOracleCommand("--mode favor --name toy_version --cwe CWE-134");
  auto targets = RankTargets(testsupport::ToylibRecords(), config);
  REQUIRE_FALSE(targets.empty());
  CHECK(targets[0].record.name == "toy_version");
  CHECK(targets[0].composite_score == Catch::Approx(1.0));
}

TEST_CASE("singleton inventory ranks at 1, empty inventory throws") {
  OracleConfig config;
  std::vector<FunctionRecord> one = {MakeRecord("only", "{ return 0; }", 1)};
  auto targets = RankTargets(one, config);
  REQUIRE(targets.size() == 1);
  CHECK(targets[0].rank == 1);
  CHECK_THROWS_AS(RankTargets({}, config), EmptyInventory);
}

TEST_CASE("top_k clamps to the inventory size") {
  OracleConfig config;
  config.top_k = 100;
  CHECK(RankTargets(testsupport::ToylibRecords(), config).size() == 5);
  config.top_k = 2;
  auto two = RankTargets(testsupport::ToylibRecords(), config);
  REQUIRE(two.size() == 2);
  CHECK(two[0].rank == 1);
  CHECK(two[1].rank == 2);
}

TEST_CASE("cwe_hints override predicted CWEs") {
  OracleConfig config;
  config.top_k = 10;
  std::map<std::string, std::vector<std::string>> hints = {
      {"toy_checksum", {"CWE-134"}}};
  auto targets = RankTargets(testsupport::ToylibRecords(), config, hints);
  for (const auto &t : targets) {
    if (t.record.name == "toy_checksum")
      CHECK(t.verdict.predicted_cwes == std::vector<std::string>{"CWE-134"});
  }
}

TEST_CASE("invalid weights are rejected") {
  OracleConfig config;
  config.w1 = 0.5;
  config.w2 = 0.5;
  config.w3 = 0.5;
  CHECK_THROWS_AS(config.Validate(), ConfigError);
}

TEST_CASE("invariant: ranking is deterministic including tie order") {
  OracleConfig config;
  config.top_k = 10;
  auto a = RankTargets(testsupport::ToylibRecords(), config);
  auto b = RankTargets(testsupport::ToylibRecords(), config);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); i++)
    CHECK(CandidateToJson(a[i]) == CandidateToJson(b[i]));
}

TEST_CASE("invariant: composite scores stay in [0,1] under random configs") {
  std::mt19937 rng(7777);
  std::uniform_real_distribution<double> uni(0.01, 1.0);
  const std::vector<std::string> snippets = {
      "free(p); free(p);", "q = malloc(4); *q = 1;",
      "memcpy(a, b, n);",  "printf(fmt);",
      "x = y + z;",        "if (k) { k--; }",
  };
  for (int trial = 0; trial < 300; trial++) {
    double w1 = uni(rng), w2 = uni(rng), w3 = uni(rng);
    const double sum = w1 + w2 + w3;
    OracleConfig config;
    config.w1 = w1 / sum;
    config.w2 = w2 / sum;
    config.w3 = w3 / sum;
    config.top_k = 10;
    std::string body = "{ ";
    for (size_t i = 0, n = rng() % 5; i < n; i++)
      body += snippets[rng() % snippets.size()] + " ";
    body += "}";
    std::vector<FunctionRecord> recs = {
        MakeRecord("parse_rnd", body, static_cast<int>(rng() % 20) + 1)};
    auto targets = RankTargets(recs, config);
    REQUIRE(targets.size() == 1);
    CHECK(targets[0].composite_score >= 0.0);
    CHECK(targets[0].composite_score <= 1.0);
    CHECK(targets[0].verdict.heuristic3_score >= 0.0);
    CHECK(targets[0].verdict.heuristic3_score <= 1.0);
  }
}

TEST_CASE("invariant: one more dangerous feature never lowers the score") {
  std::mt19937 rng(31337);
  const std::vector<std::string> base_snips = {
      "x = y + z;", "if (k) { k--; }", "memcpy(a, b, n);", "free(p); free(p);",
  };
  int counter = 0;
  for (int trial = 0; trial < 300; trial++) {
    std::string body = "{ ";
    for (size_t i = 0, n = rng() % 4; i < n; i++)
      body += base_snips[rng() % base_snips.size()] + " ";
    body += "}";
    const double before = LexicalVulnScore(MakeRecord("f", body, 1)).first;

    const std::string fresh = "v" + std::to_string(counter++);
    std::string extra;
    switch (rng() % 4) {
      case 0: extra = "free(" + fresh + "); free(" + fresh + ");"; break;
      case 1: extra = fresh + " = malloc(4); *" + fresh + " = 1;"; break;
      case 2: extra = "memcpy(" + fresh + ", src, n);"; break;
      default: extra = "printf(" + fresh + ");"; break;
    }
    std::string grown = body.substr(0, body.size() - 1) + extra + " }";
    const double after = LexicalVulnScore(MakeRecord("f", grown, 1)).first;
    CHECK(after >= before);
  }
}

TEST_CASE("verdict JSON round-trips") {
  OracleConfig config;
  config.top_k = 10;
  for (const auto &t : RankTargets(testsupport::ToylibRecords(), config)) {
    auto j = CandidateToJson(t);
    CHECK(CandidateToJson(CandidateFromJson(j)) == j);
  }
}
