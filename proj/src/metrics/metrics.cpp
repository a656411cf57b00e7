#include "polurl/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "polurl/random.hpp"

namespace polurl::metrics {

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::yes: return "yes";
    case Outcome::no: return "no";
    case Outcome::skip: return "skip";
    case Outcome::unparseable: return "unparseable";
  }
  return "?";
}

void ConfusionMatrix::add(Outcome predicted, Label gold) {
  switch (predicted) {
    case Outcome::yes: ++(gold == Label::POL ? tp : fp); break;
    case Outcome::no: ++(gold == Label::POL ? fn : tn); break;
    case Outcome::skip: ++excluded_skip; break;
    case Outcome::unparseable: ++excluded_unparseable; break;
  }
}

nlohmann::json to_json(const ConfusionMatrix& m) {
  return {{"tp", m.tp},
          {"fp", m.fp},
          {"fn", m.fn},
          {"tn", m.tn},
          {"excluded_skip", m.excluded_skip},
          {"excluded_unparseable", m.excluded_unparseable}};
}

ConfusionMatrix confusion(const Predictions& predictions, const GoldMap& gold) {
  ConfusionMatrix m;
  for (const auto& [id, outcome] : predictions) {
    const auto g = gold.find(id);
    if (g == gold.end()) throw DataError("prediction for " + id + " has no gold label");
    m.add(outcome, g->second);
  }
  if (predictions.empty()) throw DataError("no predictions overlap the gold labels");
  return m;
}

namespace {

Metric ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Metric accuracy(const ConfusionMatrix& m) { return ratio(m.tp + m.tn, m.n()); }
Metric sensitivity(const ConfusionMatrix& m) { return ratio(m.tp, m.tp + m.fn); }
Metric specificity(const ConfusionMatrix& m) { return ratio(m.tn, m.tn + m.fp); }
Metric precision(const ConfusionMatrix& m) { return ratio(m.tp, m.tp + m.fp); }

Metric balanced_accuracy(const ConfusionMatrix& m) {
  const auto se = sensitivity(m);
  const auto sp = specificity(m);
  if (!se || !sp) return std::nullopt;
  return (*se + *sp) / 2;
}

Metric f1_yes(const ConfusionMatrix& m) { return ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn); }

Metric mcc(const ConfusionMatrix& m) {
  // Products are exact in long double for n up to ~65k; the final division
  // runs in double so the result does not depend on the long double format.
  const long double den = static_cast<long double>(m.tp + m.fp) * (m.tp + m.fn) *
                          (m.tn + m.fp) * (m.tn + m.fn);
  if (den == 0) return std::nullopt;
  const long double num = static_cast<long double>(m.tp) * m.tn - static_cast<long double>(m.fp) * m.fn;
  return static_cast<double>(num) / std::sqrt(static_cast<double>(den));
}

KappaResult cohen_kappa(const ConfusionMatrix& m) {
  KappaResult r;
  const std::int64_t n = m.n();
  if (n == 0) return r;
  // kappa = (n * agree - chance) / (n^2 - chance), one rounding.
  const std::int64_t nn = n * n;
  const std::int64_t agree = m.tp + m.tn;
  const std::int64_t chance = (m.tp + m.fp) * (m.tp + m.fn) + (m.fn + m.tn) * (m.fp + m.tn);
  r.p_o = static_cast<double>(agree) / static_cast<double>(n);
  r.p_e = static_cast<double>(chance) / static_cast<double>(nn);
  const bool degenerate = m.tp + m.fp == 0 || m.fn + m.tn == 0 || m.tp + m.fn == 0 ||
                          m.fp + m.tn == 0;
  if (degenerate || n < 2) return r;
  const double k = static_cast<double>(n * agree - chance) / static_cast<double>(nn - chance);
  r.kappa = k;
  r.z = k * std::sqrt(static_cast<double>(n) * static_cast<double>(nn - chance) /
                      static_cast<double>(chance));
  return r;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::optional<Interval> bootstrap_ci(const std::vector<ScoredPair>& pairs, const MetricFn& metric,
                                     const BootstrapConfig& config) {
  if (config.resamples < 100) throw std::invalid_argument("bootstrap needs >= 100 resamples");
  if (!(config.level > 0 && config.level < 1))
    throw std::invalid_argument("bootstrap level must be in (0,1)");
  std::vector<ScoredPair> counted;
  for (const auto& p : pairs)
    if (p.predicted == Outcome::yes || p.predicted == Outcome::no) counted.push_back(p);
  if (counted.size() < 10) throw std::invalid_argument("bootstrap needs >= 10 scored items");

  ConfusionMatrix full;
  for (const auto& p : counted) full.add(p.predicted, p.gold);
  const Metric point = metric(full);

  const auto resamples = static_cast<std::size_t>(config.resamples);
  std::vector<Metric> values(resamples);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      std::mt19937_64 rng(mix_seed(config.seed, r));
      ConfusionMatrix m;
      for (std::size_t k = 0; k < counted.size(); ++k) {
        const auto& p = counted[uniform_below(rng, counted.size())];
        m.add(p.predicted, p.gold);
      }
      values[r] = metric(m);
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, resamples));
  if (workers == 1) {
    run(0, resamples);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (resamples + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back(run, std::min(w * chunk, resamples), std::min((w + 1) * chunk, resamples));
  }

  std::vector<double> defined;
  defined.reserve(resamples);
  for (const auto& v : values)
    if (v) defined.push_back(*v);
  if (static_cast<double>(resamples - defined.size()) > 0.2 * static_cast<double>(resamples))
    return std::nullopt;
  std::sort(defined.begin(), defined.end());
  const double alpha = 1 - config.level;
  Interval ci{quantile_sorted(defined, alpha / 2), quantile_sorted(defined, 1 - alpha / 2)};
  if (point) {
    ci.low = std::min(ci.low, *point);
    ci.high = std::max(ci.high, *point);
  }
  return ci;
}

MetricReport make_report(const std::vector<ScoredPair>& pairs, const BootstrapConfig& config,
                         bool with_ci) {
  MetricReport r;
  for (const auto& p : pairs) r.matrix.add(p.predicted, p.gold);
  const auto& m = r.matrix;
  r.total_items = static_cast<std::int64_t>(pairs.size());
  r.coverage = ratio(m.n(), r.total_items);
  r.accuracy = accuracy(m);
  r.balanced_accuracy = balanced_accuracy(m);
  r.f1_yes = f1_yes(m);
  r.sensitivity = sensitivity(m);
  r.specificity = specificity(m);
  r.precision = precision(m);
  r.mcc = mcc(m);
  const auto k = cohen_kappa(m);
  r.kappa = k.kappa;
  r.kappa_z = k.z;
  if (with_ci && m.n() >= 10) {
    r.accuracy_ci = bootstrap_ci(pairs, accuracy, config);
    BootstrapConfig f1_config = config;
    f1_config.seed = mix_seed(config.seed, 0xF1);
    r.f1_yes_ci = bootstrap_ci(pairs, f1_yes, f1_config);
  }
  return r;
}

nlohmann::json to_json(const Metric& m) { return m ? nlohmann::json(*m) : nlohmann::json(nullptr); }

nlohmann::json to_json(const std::optional<Interval>& i) {
  if (!i) return nullptr;
  return nlohmann::json::array({i->low, i->high});
}

nlohmann::json to_json(const MetricReport& r) {
  return {{"matrix", to_json(r.matrix)},
          {"accuracy", to_json(r.accuracy)},
          {"accuracy_ci", to_json(r.accuracy_ci)},
          {"balanced_accuracy", to_json(r.balanced_accuracy)},
          {"f1_yes", to_json(r.f1_yes)},
          {"f1_yes_ci", to_json(r.f1_yes_ci)},
          {"sensitivity", to_json(r.sensitivity)},
          {"specificity", to_json(r.specificity)},
          {"precision", to_json(r.precision)},
          {"mcc", to_json(r.mcc)},
          {"kappa", to_json(r.kappa)},
          {"kappa_z", to_json(r.kappa_z)},
          {"total_items", r.total_items},
          {"coverage", to_json(r.coverage)}};
}

}  // namespace polurl::metrics

namespace polurl::metrics {

Metric metric_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

namespace {

std::optional<Interval> interval_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return Interval{j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport r;
  const auto& m = j.at("matrix");
  r.matrix.tp = m.at("tp").get<std::int64_t>();
  r.matrix.fp = m.at("fp").get<std::int64_t>();
  r.matrix.fn = m.at("fn").get<std::int64_t>();
  r.matrix.tn = m.at("tn").get<std::int64_t>();
  r.matrix.excluded_skip = m.at("excluded_skip").get<std::int64_t>();
  r.matrix.excluded_unparseable = m.at("excluded_unparseable").get<std::int64_t>();
  r.accuracy = metric_from_json(j.at("accuracy"));
  r.accuracy_ci = interval_from_json(j.at("accuracy_ci"));
  r.balanced_accuracy = metric_from_json(j.at("balanced_accuracy"));
  r.f1_yes = metric_from_json(j.at("f1_yes"));
  r.f1_yes_ci = interval_from_json(j.at("f1_yes_ci"));
  r.sensitivity = metric_from_json(j.at("sensitivity"));
  r.specificity = metric_from_json(j.at("specificity"));
  r.precision = metric_from_json(j.at("precision"));
  r.mcc = metric_from_json(j.at("mcc"));
  r.kappa = metric_from_json(j.at("kappa"));
  r.kappa_z = metric_from_json(j.at("kappa_z"));
  r.total_items = j.at("total_items").get<std::int64_t>();
  r.coverage = metric_from_json(j.at("coverage"));
  return r;
}

}  // namespace polurl::metrics
