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
// Reporting: aggregate per-target confirmations into one pipeline report
// and compute both precision variants (any-crash and matching-CWE).

#ifndef FUZZORACLE_REPORT_H_
#define FUZZORACLE_REPORT_H_

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fuzzoracle/campaign.hpp"
#include "fuzzoracle/gate.hpp"
#include "fuzzoracle/oracle.hpp"
#include "fuzzoracle/util.hpp"

namespace fuzzoracle {

inline const char *kReportSchemaVersion = "1";
inline const char *kNormalizedTimestamp = "1970-01-01T00:00:00Z";

struct MetricsSummary {
  int flagged_count = 0;
  int confirmed_matching = 0;
  int confirmed_other = 0;
  int unconfirmed = 0;
  std::optional<double> oracle_precision;     // any-crash variant
  std::optional<double> precision_matching;   // strict variant
  double gate_acceptance_rate = 0.0;
};

// Counts outcomes and computes both precision variants. Undefined
// precision (nothing flagged) stays unset and serializes as null.
inline MetricsSummary ComputeConfirmationMetrics(
    const std::vector<Confirmation> &confirmations) {
  MetricsSummary m;
  m.flagged_count = static_cast<int>(confirmations.size());
  for (const auto &c : confirmations) {
    switch (c.outcome) {
      case ConfirmationOutcome::kConfirmedMatchingCwe:
        m.confirmed_matching++;
        break;
      case ConfirmationOutcome::kConfirmedOtherCrash:
        m.confirmed_other++;
        break;
      case ConfirmationOutcome::kUnconfirmed:
        m.unconfirmed++;
        break;
    }
  }
  if (m.flagged_count > 0) {
    m.oracle_precision =
        static_cast<double>(m.confirmed_matching + m.confirmed_other) /
        static_cast<double>(m.flagged_count);
    m.precision_matching = static_cast<double>(m.confirmed_matching) /
                           static_cast<double>(m.flagged_count);
  }
  return m;
}

inline double GateAcceptanceRate(const std::vector<GateReport> &reports) {
  if (reports.empty()) return 0.0;
  int accepted = 0;
  for (const auto &r : reports)
    if (r.accepted) accepted++;
  return static_cast<double>(accepted) / static_cast<double>(reports.size());
}

// One ranked target's full trajectory through the pipeline.
struct TargetReport {
  TargetCandidate candidate;
  int attempts_used = 0;
  std::vector<GateReport> gate_reports;
  std::optional<CampaignResult> campaign;
  Confirmation confirmation;
};

struct PipelineReport {
  std::string run_id;
  nlohmann::ordered_json config_snapshot;
  std::vector<TargetReport> targets;
  std::string started_at;
  std::string ended_at;
  MetricsSummary metrics;
};

// Recomputes the metrics block from the report's own targets.
inline void FinalizeMetrics(PipelineReport &report) {
  std::vector<Confirmation> confirmations;
  std::vector<GateReport> gates;
  for (const auto &t : report.targets) {
    confirmations.push_back(t.confirmation);
    for (const auto &g : t.gate_reports) gates.push_back(g);
  }
  report.metrics = ComputeConfirmationMetrics(confirmations);
  report.metrics.gate_acceptance_rate = GateAcceptanceRate(gates);
}

// --- Serialization ------------------------------------------------------------

inline nlohmann::ordered_json MetricsToJson(const MetricsSummary &m) {
  auto opt = [](const std::optional<double> &v) {
    return v.has_value() ? nlohmann::ordered_json(*v)
                         : nlohmann::ordered_json(nullptr);
  };
  return nlohmann::ordered_json{
      {"flagged_count", m.flagged_count},
      {"confirmed_matching", m.confirmed_matching},
      {"confirmed_other", m.confirmed_other},
      {"unconfirmed", m.unconfirmed},
      {"oracle_precision", opt(m.oracle_precision)},
      {"precision_matching", opt(m.precision_matching)},
      {"gate_acceptance_rate", m.gate_acceptance_rate}};
}

inline MetricsSummary MetricsFromJson(const nlohmann::json &j) {
  MetricsSummary m;
  m.flagged_count = j.value("flagged_count", 0);
  m.confirmed_matching = j.value("confirmed_matching", 0);
  m.confirmed_other = j.value("confirmed_other", 0);
  m.unconfirmed = j.value("unconfirmed", 0);
  if (j.contains("oracle_precision") && !j["oracle_precision"].is_null())
    m.oracle_precision = j["oracle_precision"].get<double>();
  if (j.contains("precision_matching") && !j["precision_matching"].is_null())
    m.precision_matching = j["precision_matching"].get<double>();
  m.gate_acceptance_rate = j.value("gate_acceptance_rate", 0.0);
  return m;
}

inline nlohmann::ordered_json TargetReportToJson(const TargetReport &t) {
  nlohmann::ordered_json gates = nlohmann::ordered_json::array();
  for (const auto &g : t.gate_reports) gates.push_back(GateReportToJson(g));
  return nlohmann::ordered_json{
      {"candidate", CandidateToJson(t.candidate)},
      {"attempts_used", t.attempts_used},
      {"gate_reports", gates},
      {"campaign", t.campaign.has_value()
                       ? CampaignResultToJson(*t.campaign)
                       : nlohmann::ordered_json(nullptr)},
      {"confirmation", ConfirmationToJson(t.confirmation)}};
}

inline TargetReport TargetReportFromJson(const nlohmann::json &j) {
  TargetReport t;
  t.candidate = CandidateFromJson(j.at("candidate"));
  t.attempts_used = j.value("attempts_used", 0);
  if (j.contains("gate_reports"))
    for (const auto &g : j["gate_reports"])
      t.gate_reports.push_back(GateReportFromJson(g));
  if (j.contains("campaign") && !j["campaign"].is_null())
    t.campaign = CampaignResultFromJson(j["campaign"]);
  if (j.contains("confirmation"))
    t.confirmation = ConfirmationFromJson(j["confirmation"]);
  return t;
}

inline nlohmann::ordered_json PipelineReportToJson(
    const PipelineReport &r, bool normalize_timestamps = false) {
  nlohmann::ordered_json targets = nlohmann::ordered_json::array();
  for (const auto &t : r.targets) targets.push_back(TargetReportToJson(t));
  return nlohmann::ordered_json{
      {"schema_version", kReportSchemaVersion},
      {"run_id", r.run_id},
      {"started_at", normalize_timestamps ? kNormalizedTimestamp : r.started_at},
      {"ended_at", normalize_timestamps ? kNormalizedTimestamp : r.ended_at},
      {"config_snapshot", r.config_snapshot},
      {"targets", targets},
      {"metrics", MetricsToJson(r.metrics)}};
}

inline PipelineReport PipelineReportFromJson(const nlohmann::json &j) {
  PipelineReport r;
  r.run_id = j.value("run_id", "");
  r.config_snapshot = j.value("config_snapshot", nlohmann::ordered_json());
  if (j.contains("targets"))
    for (const auto &t : j["targets"])
      r.targets.push_back(TargetReportFromJson(t));
  r.started_at = j.value("started_at", "");
  r.ended_at = j.value("ended_at", "");
  if (j.contains("metrics")) r.metrics = MetricsFromJson(j["metrics"]);
  return r;
}

// --- Rendering ---------------------------------------------------------------

enum class ReportFormat { kJson, kMarkdown };

inline std::string RenderReport(const PipelineReport &report,
                                ReportFormat format,
                                bool normalize_timestamps = false) {
  if (format == ReportFormat::kJson)
    return PipelineReportToJson(report, normalize_timestamps).dump(2) + "\n";

  auto fmt_opt = [](const std::optional<double> &v) {
    if (!v.has_value()) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };

  std::string md;
  md += "# Fuzz pipeline report\n\n";
  md += "- run_id: `" + report.run_id + "`\n";
  md += "- started_at: " +
        (normalize_timestamps ? std::string(kNormalizedTimestamp)
                              : report.started_at) +
        "\n";
  md += "- ended_at: " +
        (normalize_timestamps ? std::string(kNormalizedTimestamp)
                              : report.ended_at) +
        "\n\n";
  md += "## Targets\n\n";
  md += "| rank | function | gate | campaign | outcome | matched CWE |\n";
  md += "|------|----------|------|----------|---------|-------------|\n";
  for (const auto &t : report.targets) {
    std::string gate = "not_run";
    if (!t.gate_reports.empty())
      gate = t.gate_reports.back().accepted ? "accepted" : "rejected";
    const std::string campaign =
        t.campaign.has_value() ? CampaignStatusName(t.campaign->status)
                               : "not_run";
    md += "| " + std::to_string(t.candidate.rank) + " | " +
          t.candidate.record.name + " | " + gate + " | " + campaign + " | " +
          ConfirmationOutcomeName(t.confirmation.outcome) + " | " +
          (t.confirmation.matched_cwe.has_value() ? *t.confirmation.matched_cwe
                                                  : "-") +
          " |\n";
  }
  const MetricsSummary &m = report.metrics;
  md += "\n## Metrics\n\n";
  md += "- flagged: " + std::to_string(m.flagged_count) + "\n";
  md += "- confirmed (matching CWE): " + std::to_string(m.confirmed_matching) +
        "\n";
  md += "- confirmed (other crash): " + std::to_string(m.confirmed_other) + "\n";
  md += "- unconfirmed: " + std::to_string(m.unconfirmed) + "\n";
  md += "- oracle precision (any crash): " + fmt_opt(m.oracle_precision) + "\n";
  md += "- oracle precision (matching CWE): " + fmt_opt(m.precision_matching) +
        "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", m.gate_acceptance_rate);
  md += "- gate acceptance rate: " + std::string(buf) + "\n";
  return md;
}

}  // namespace fuzzoracle

#endif  // FUZZORACLE_REPORT_H_
