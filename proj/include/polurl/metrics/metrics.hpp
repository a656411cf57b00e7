#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polurl/common.hpp"

namespace polurl::metrics {

// A metric value; nullopt means undefined (zero denominator), never 0.
using Metric = std::optional<double>;

// Scored verdict of one item. skip and unparseable never enter the matrix.
enum class Outcome { yes, no, skip, unparseable };
std::string_view to_string(Outcome o);

struct ConfusionMatrix {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::int64_t excluded_skip = 0;
  std::int64_t excluded_unparseable = 0;

  std::int64_t n() const { return tp + fp + fn + tn; }
  void add(Outcome predicted, Label gold);
  bool operator==(const ConfusionMatrix&) const = default;
};

nlohmann::json to_json(const ConfusionMatrix& m);

using Predictions = std::map<std::string, Outcome>;
using GoldMap = std::map<std::string, Label>;

// Throws DataError when a prediction has no gold label or nothing is shared.
ConfusionMatrix confusion(const Predictions& predictions, const GoldMap& gold);

Metric accuracy(const ConfusionMatrix& m);
Metric sensitivity(const ConfusionMatrix& m);
Metric specificity(const ConfusionMatrix& m);
Metric precision(const ConfusionMatrix& m);
// (sensitivity + specificity) / 2, undefined if either is.
Metric balanced_accuracy(const ConfusionMatrix& m);
// 2tp / (2tp + fp + fn).
Metric f1_yes(const ConfusionMatrix& m);
Metric mcc(const ConfusionMatrix& m);

struct KappaResult {
  Metric kappa;
  Metric z;  // kappa * sqrt(n (1 - p_e) / p_e)
  Metric p_o;
  Metric p_e;
};

// The matrix read as a two-rater table. Kappa is undefined when either
// rater used a single label.
KappaResult cohen_kappa(const ConfusionMatrix& m);

using MetricFn = std::function<Metric(const ConfusionMatrix&)>;

struct Interval {
  double low = 0, high = 0;
  bool operator==(const Interval&) const = default;
};

struct BootstrapConfig {
  int resamples = 2000;
  std::uint64_t seed = 20240101;
  double level = 0.95;
  std::size_t workers = 1;
};

struct ScoredPair {
  Outcome predicted = Outcome::no;
  Label gold = Label::NON;
};

// Percentile bootstrap over item pairs (excluded verdicts dropped first).
// Resample r draws from its own stream mix_seed(seed, r), so the result does
// not depend on `workers`. Undefined when the metric is undefined on more
// than 20% of resamples. The interval is widened to contain the point
// estimate when needed. Throws std::invalid_argument for < 10 pairs or
// resamples < 100.
std::optional<Interval> bootstrap_ci(const std::vector<ScoredPair>& pairs, const MetricFn& metric,
                                     const BootstrapConfig& config = {});

// Type-7 sample quantile of sorted values.
double quantile_sorted(const std::vector<double>& sorted, double q);

struct MetricReport {
  ConfusionMatrix matrix;
  Metric accuracy;
  std::optional<Interval> accuracy_ci;
  Metric balanced_accuracy;
  Metric f1_yes;
  std::optional<Interval> f1_yes_ci;
  Metric sensitivity;
  Metric specificity;
  Metric precision;
  Metric mcc;
  Metric kappa;
  Metric kappa_z;
  std::int64_t total_items = 0;  // counted + excluded
  Metric coverage;               // counted / total
};

// Point metrics, plus bootstrap intervals when `with_ci` and >= 10 items are scored.
MetricReport make_report(const std::vector<ScoredPair>& pairs, const BootstrapConfig& config,
                         bool with_ci = true);

nlohmann::json to_json(const Metric& m);
nlohmann::json to_json(const std::optional<Interval>& i);
nlohmann::json to_json(const MetricReport& r);

Metric metric_from_json(const nlohmann::json& j);
MetricReport report_from_json(const nlohmann::json& j);

}  // namespace polurl::metrics
