#pragma once

#include <atomic>
#include <string>
#include <vector>

#include "polurl/cli/config.hpp"
#include "polurl/metrics/stratify.hpp"
#include "polurl/prompt/response.hpp"

namespace polurl::cli {

// A stage ran before the stage that produces its input.
class StageError : public DataError {
 public:
  StageError(const std::string& missing, const std::string& required_stage);
  const std::string& required_stage() const { return stage_; }

 private:
  std::string stage_;
};

// Files under the output directory.
namespace layout {
std::string visits(const RunConfig& c);           // visits.jsonl
std::string ingest_report(const RunConfig& c);    // ingest_report.json
std::string filtered(const RunConfig& c);         // filtered.jsonl
std::string dataset_dir(const RunConfig& c);      // dataset/
std::string predictions_dir(const RunConfig& c);  // predictions/
std::string predictions(const RunConfig& c, const std::string& backend, Mode mode);
std::string metrics(const RunConfig& c);          // metrics.json
std::string diagnostics(const RunConfig& c);      // diagnostics.json
std::string report_dir(const RunConfig& c);       // reports/<run_id>/
std::string annotation_log(const RunConfig& c);   // annotation/events.jsonl
std::string gold(const RunConfig& c);             // configured gold or annotation/gold.jsonl
}  // namespace layout

struct StageResult {
  std::string summary;
  bool changed = false;  // any output file rewritten
};

StageResult run_ingest(const RunConfig& c);
StageResult run_filter(const RunConfig& c);
StageResult run_sample(const RunConfig& c);
StageResult run_fetch(const RunConfig& c, bool refetch = false);
StageResult run_classify(const RunConfig& c, const std::string& backend_id, Mode mode);
StageResult run_evaluate(const RunConfig& c);
StageResult run_diagnose(const RunConfig& c);
StageResult run_report(const RunConfig& c);
StageResult run_audit(const RunConfig& c, const std::string& table_override = {});

// Writes the current gold labels of the annotation log to layout::gold.
StageResult export_gold(const RunConfig& c);

// Serves the annotation API until `stop_flag` becomes true, then exports gold.
// Assigns the dataset to the configured coders on first start.
StageResult run_serve(const RunConfig& c, const std::atomic<bool>& stop_flag,
                      std::atomic<int>* bound_port = nullptr);

// Scored items for one prediction file, with text-run positions attached.
struct ScoredRun {
  std::string backend;
  Mode mode = Mode::full_text;
  std::vector<metrics::StratItem> items;
  std::size_t without_gold = 0;
};

// Every predictions/<backend>__<mode>.jsonl joined with gold and the dataset.
std::vector<ScoredRun> load_scored_runs(const RunConfig& c);

}  // namespace polurl::cli
