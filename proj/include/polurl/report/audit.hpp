#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polurl/metrics/metrics.hpp"

namespace polurl::report {

// A Table-2 row as printed: percentages for accuracy, balanced accuracy,
// F1 and specificity; coefficients for MCC and kappa.
struct PublishedRow {
  std::string model;
  std::string source;  // "Text" or "URL"
  double accuracy = 0, balanced_accuracy = 0, f1_yes = 0, specificity = 0;
  double mcc = 0, kappa = 0;
  std::optional<std::pair<double, double>> accuracy_ci, f1_ci;
};

std::vector<PublishedRow> load_published(const std::string& path);
nlohmann::json to_json(const PublishedRow& r);

struct AuditTolerance {
  double percent = 0.05;      // percentage points
  double coefficient = 0.005;
};

struct AuditResult {
  PublishedRow row;
  bool consistent = false;
  std::optional<metrics::ConfusionMatrix> matrix;  // smallest n, then smallest tp+fn
  std::size_t matches = 0;                         // all matrices within tolerance
};

// True when every metric of `m` rounds to the row within tolerance.
bool matrix_reproduces(const metrics::ConfusionMatrix& m, const PublishedRow& row,
                       const AuditTolerance& tol = {});

// Exhaustive search over (tp, fp, fn, tn) with 2 <= n <= max_n. Candidate tn
// and tp ranges come from the specificity and balanced-accuracy bounds; every
// candidate is then checked with the metric functions.
AuditResult audit_row(const PublishedRow& row, int max_n = 1200, const AuditTolerance& tol = {});

// Rows are searched in parallel; output order follows the input.
std::vector<AuditResult> audit_published(const std::vector<PublishedRow>& rows, int max_n = 1200,
                                         const AuditTolerance& tol = {}, std::size_t workers = 4);

// Copy of `row` with accuracy raised by `delta_pp` percentage points.
PublishedRow corrupt_accuracy(PublishedRow row, double delta_pp = 5.0);

nlohmann::json to_json(const AuditResult& r);

}  // namespace polurl::report
