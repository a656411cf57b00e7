#include "polurl/metrics/stratify.hpp"

namespace polurl::metrics {

namespace {

bool correct(const StratItem& it) {
  return (it.predicted == Outcome::yes && it.gold == Label::POL) ||
         (it.predicted == Outcome::no && it.gold == Label::NON);
}

bool scored(const StratItem& it) {
  return it.predicted == Outcome::yes || it.predicted == Outcome::no;
}

bool centered(const StratItem& it) {
  return it.text_position && *it.text_position >= 4 && *it.text_position <= 6;
}

ConfusionMatrix matrix_of(const std::vector<StratItem>& items) {
  ConfusionMatrix m;
  for (const auto& it : items) m.add(it.predicted, it.gold);
  return m;
}

}  // namespace

std::map<std::string, Metric> agreement_by_class(const std::vector<StratItem>& items,
                                                 std::vector<std::string>* warnings) {
  const auto m = matrix_of(items);
  std::map<std::string, Metric> out;
  if (m.tp + m.fn > 0) {
    out["POL"] = sensitivity(m);
  } else if (warnings) {
    warnings->push_back("class POL has no scored items");
  }
  if (m.tn + m.fp > 0) {
    out["NON"] = specificity(m);
  } else if (warnings) {
    warnings->push_back("class NON has no scored items");
  }
  return out;
}

std::map<Country, Metric> agreement_by_country(const std::vector<StratItem>& items,
                                               std::vector<std::string>* warnings) {
  std::map<Country, ConfusionMatrix> per;
  for (const auto& it : items) per[it.country].add(it.predicted, it.gold);
  std::map<Country, Metric> out;
  for (const Country c : kAllCountries) {
    const auto it = per.find(c);
    if (it == per.end() || it->second.n() == 0) {
      if (warnings && it != per.end())
        warnings->push_back("country " + std::string(to_string(c)) + " has no scored items");
      continue;
    }
    out[c] = balanced_accuracy(it->second);
  }
  return out;
}

PositionCurve agreement_by_position(const std::vector<StratItem>& items) {
  std::int64_t pol = 0, pol_missing = 0;
  for (const auto& it : items) {
    if (it.gold != Label::POL) continue;
    ++pol;
    if (!it.text_position) ++pol_missing;
  }
  if (pol > 0 && 2 * pol_missing > pol)
    throw DiagnosticError("text-run positions missing for " + std::to_string(pol_missing) + " of " +
                          std::to_string(pol) + " political items");

  std::array<std::int64_t, 10> hit{}, count{};
  for (const auto& it : items) {
    if (!it.text_position || !scored(it)) continue;
    const int p = *it.text_position;
    if (p < 1 || p > 10) throw DataError("item " + it.item_id + ": position outside 1..10");
    ++count[p - 1];
    if (correct(it)) ++hit[p - 1];
  }
  PositionCurve c;
  double raw_sum = 0;
  int raw_n = 0;
  std::int64_t hits = 0, total = 0;
  for (int p = 0; p < 10; ++p) {
    c.cells[p].count = count[p];
    if (count[p] == 0) continue;
    const double a = static_cast<double>(hit[p]) / static_cast<double>(count[p]);
    c.cells[p].agreement = a;
    raw_sum += a;
    ++raw_n;
    hits += hit[p];
    total += count[p];
  }
  if (raw_n > 0) {
    c.raw_mean = raw_sum / raw_n;
    c.weighted_mean = static_cast<double>(hits) / static_cast<double>(total);
  }
  return c;
}

Metric filtered_balanced_agreement(const std::vector<StratItem>& items) {
  ConfusionMatrix m;
  for (const auto& it : items)
    if (!centered(it)) m.add(it.predicted, it.gold);
  if (m.n() == 0) return std::nullopt;
  return balanced_accuracy(m);
}

StratifiedAgreement stratify(const std::vector<StratItem>& items) {
  StratifiedAgreement s;
  s.by_class = agreement_by_class(items, &s.warnings);
  s.by_country = agreement_by_country(items, &s.warnings);
  try {
    s.by_position = agreement_by_position(items);
  } catch (const DiagnosticError& e) {
    s.warnings.push_back(std::string("position diagnostic aborted: ") + e.what());
  }
  s.filtered_balanced = filtered_balanced_agreement(items);
  s.unfiltered_balanced = balanced_accuracy(matrix_of(items));
  return s;
}

nlohmann::json to_json(const PositionCurve& c) {
  auto cells = nlohmann::json::array();
  for (int p = 0; p < 10; ++p)
    cells.push_back({{"position", p + 1},
                     {"agreement", to_json(c.cells[p].agreement)},
                     {"count", c.cells[p].count}});
  return {{"cells", cells},
          {"raw_mean", to_json(c.raw_mean)},
          {"weighted_mean", to_json(c.weighted_mean)}};
}

nlohmann::json to_json(const StratifiedAgreement& s) {
  nlohmann::json by_class = nlohmann::json::object();
  for (const auto& [k, v] : s.by_class) by_class[k] = to_json(v);
  nlohmann::json by_country = nlohmann::json::object();
  for (const auto& [k, v] : s.by_country) by_country[std::string(to_string(k))] = to_json(v);
  return {{"by_class", by_class},
          {"by_country", by_country},
          {"by_position", to_json(s.by_position)},
          {"filtered_balanced", to_json(s.filtered_balanced)},
          {"unfiltered_balanced", to_json(s.unfiltered_balanced)},
          {"warnings", s.warnings}};
}

}  // namespace polurl::metrics

namespace polurl::metrics {

StratifiedAgreement strata_from_json(const nlohmann::json& j) {
  StratifiedAgreement s;
  for (const auto& [k, v] : j.at("by_class").items()) s.by_class[k] = metric_from_json(v);
  for (const auto& [k, v] : j.at("by_country").items()) {
    const auto c = parse_country(k);
    if (!c) throw DataError("diagnostics: unknown country " + k);
    s.by_country[*c] = metric_from_json(v);
  }
  const auto& pos = j.at("by_position");
  for (const auto& cell : pos.at("cells")) {
    const int p = cell.at("position").get<int>();
    if (p < 1 || p > 10) throw DataError("diagnostics: position outside 1..10");
    s.by_position.cells[p - 1] = {metric_from_json(cell.at("agreement")),
                                  cell.at("count").get<std::int64_t>()};
  }
  s.by_position.raw_mean = metric_from_json(pos.at("raw_mean"));
  s.by_position.weighted_mean = metric_from_json(pos.at("weighted_mean"));
  s.filtered_balanced = metric_from_json(j.at("filtered_balanced"));
  s.unfiltered_balanced = metric_from_json(j.at("unfiltered_balanced"));
  s.warnings = j.value("warnings", std::vector<std::string>{});
  return s;
}

}  // namespace polurl::metrics
