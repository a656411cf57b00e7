#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polurl/common.hpp"
#include "polurl/metrics/metrics.hpp"
#include "polurl/metrics/stratify.hpp"

namespace polurl::report {

// "Text" / "URL", the source column of the table.
std::string_view source_label(Mode m);

// Shortest round-trip decimal; "NA" when undefined.
std::string format_metric(const metrics::Metric& v);

struct RunResult {
  std::string model;  // backend id
  Mode mode = Mode::full_text;
  metrics::MetricReport report;
  metrics::StratifiedAgreement strata;
};

// Column order: model, source, accuracy [ci], balanced accuracy, F1 (Yes) [ci],
// specificity, MCC, kappa, then n and the exclusion counters.
std::string table_csv(const std::vector<RunResult>& runs);
nlohmann::json table_json(const std::vector<RunResult>& runs);

// fig2.csv .. fig7.csv keyed by file name. A figure with no rows is left out
// and reported in `warnings`.
std::map<std::string, std::string> figure_files(const std::vector<RunResult>& runs,
                                                std::vector<std::string>* warnings = nullptr);

struct RunManifest {
  std::string run_id;
  std::string dataset_id;
  std::vector<std::string> backend_ids;
  std::vector<std::string> modes;
  std::map<std::string, std::uint64_t> seeds;
  std::string config_digest;
  UtcInstant started{}, finished{};
};

nlohmann::json to_json(const RunManifest& m);

}  // namespace polurl::report
