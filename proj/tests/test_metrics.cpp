#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "polurl/metrics/metrics.hpp"
#include "polurl/metrics/stratify.hpp"

using namespace polurl;
using namespace polurl::metrics;

namespace {

ConfusionMatrix matrix(std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn) {
  ConfusionMatrix m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  return m;
}

std::vector<ScoredPair> pairs_for(const ConfusionMatrix& m) {
  std::vector<ScoredPair> p;
  for (std::int64_t i = 0; i < m.tp; ++i) p.push_back({Outcome::yes, Label::POL});
  for (std::int64_t i = 0; i < m.fp; ++i) p.push_back({Outcome::yes, Label::NON});
  for (std::int64_t i = 0; i < m.fn; ++i) p.push_back({Outcome::no, Label::POL});
  for (std::int64_t i = 0; i < m.tn; ++i) p.push_back({Outcome::no, Label::NON});
  return p;
}

ConfusionMatrix random_matrix(std::mt19937_64& rng, int max_cell) {
  auto cell = [&] { return static_cast<std::int64_t>(rng() % (max_cell + 1)); };
  return matrix(cell(), cell(), cell(), cell());
}

StratItem item(Outcome predicted, Label gold, std::optional<int> pos = std::nullopt,
               Country c = Country::UK) {
  static int counter = 0;
  return StratItem{"s" + std::to_string(counter++), predicted, gold, c, pos};
}

}  // namespace

TEST_CASE("worked example: tp 40, fp 20, fn 10, tn 30") {
  const auto m = matrix(40, 20, 10, 30);
  CHECK(*accuracy(m) == doctest::Approx(0.70));
  CHECK(*sensitivity(m) == doctest::Approx(0.80));
  CHECK(*specificity(m) == doctest::Approx(0.60));
  CHECK(*precision(m) == doctest::Approx(40.0 / 60.0));
  CHECK(*balanced_accuracy(m) == doctest::Approx(0.70));
  CHECK(*f1_yes(m) == doctest::Approx(80.0 / 110.0));
  CHECK(*mcc(m) == doctest::Approx(1000.0 / std::sqrt(60.0 * 50 * 50 * 40)));
  CHECK(*mcc(m) == doctest::Approx(0.4082).epsilon(1e-4));
  const auto k = cohen_kappa(m);
  CHECK(*k.kappa == doctest::Approx(0.40));
  CHECK(*k.p_o == doctest::Approx(0.70));
  CHECK(*k.p_e == doctest::Approx(0.50));
  CHECK(*k.z == doctest::Approx(0.40 * std::sqrt(100.0 * 0.5 / 0.5)));
}

TEST_CASE("undefined metrics are nullopt, never zero") {
  const auto all_no = matrix(0, 0, 5, 5);
  CHECK_FALSE(precision(all_no).has_value());
  CHECK_FALSE(mcc(all_no).has_value());
  CHECK_FALSE(cohen_kappa(all_no).kappa.has_value());
  CHECK(*f1_yes(all_no) == 0.0);

  const auto no_pol = matrix(0, 3, 0, 7);
  CHECK_FALSE(sensitivity(no_pol).has_value());
  CHECK_FALSE(balanced_accuracy(no_pol).has_value());
  CHECK(specificity(no_pol).has_value());

  const auto empty = matrix(0, 0, 0, 0);
  CHECK_FALSE(accuracy(empty).has_value());
  CHECK_FALSE(f1_yes(empty).has_value());
}

TEST_CASE("skip and unparseable verdicts never touch a confusion cell") {
  Predictions p = {{"a", Outcome::yes}, {"b", Outcome::skip}, {"c", Outcome::unparseable},
                   {"d", Outcome::no}};
  GoldMap g = {{"a", Label::POL}, {"b", Label::POL}, {"c", Label::NON}, {"d", Label::NON}};
  const auto m = confusion(p, g);
  CHECK(m == [] {
    auto x = matrix(1, 0, 0, 1);
    x.excluded_skip = 1;
    x.excluded_unparseable = 1;
    return x;
  }());
  p["e"] = Outcome::yes;
  CHECK_THROWS_AS(confusion(p, g), DataError);
  CHECK_THROWS_AS(confusion({}, g), DataError);
}

TEST_CASE("library metrics equal the pair-recount oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<oracle::Pair> raw;
    std::vector<ScoredPair> pairs;
    const int n = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      const int pred = static_cast<int>(rng() % 2), gold = static_cast<int>(rng() % 2);
      raw.push_back({pred, gold});
      pairs.push_back({pred ? Outcome::yes : Outcome::no, gold ? Label::POL : Label::NON});
    }
    const auto o = oracle::recount(raw);
    const auto r = make_report(pairs, {}, false);
    CHECK(r.accuracy == o.accuracy);
    CHECK(r.sensitivity == o.sensitivity);
    CHECK(r.specificity == o.specificity);
    CHECK(r.precision == o.precision);
    CHECK(r.balanced_accuracy == o.balanced);
    CHECK(r.f1_yes == o.f1);
    CHECK(r.mcc == o.mcc);
    CHECK(r.kappa == o.kappa);
    if (o.mcc) CHECK(*r.mcc == doctest::Approx(*o.mcc_pearson).epsilon(1e-12));
    if (o.kappa) CHECK(*r.kappa == doctest::Approx(*o.kappa_from_probabilities).epsilon(1e-12));
  }
}

TEST_CASE("properties over random matrices") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5000; ++trial) {
    const auto m = random_matrix(rng, 40);
    for (const auto& v : {accuracy(m), sensitivity(m), specificity(m), precision(m),
                          balanced_accuracy(m), f1_yes(m)})
      if (v) CHECK((*v >= 0.0 && *v <= 1.0));
    if (const auto c = mcc(m)) CHECK((*c >= -1.0 - 1e-12 && *c <= 1.0 + 1e-12));
    if (const auto k = cohen_kappa(m).kappa) CHECK(*k <= 1.0 + 1e-12);

    // Relabeling the positive class leaves MCC unchanged and swaps se/sp.
    const auto flipped = matrix(m.tn, m.fn, m.fp, m.tp);
    CHECK(mcc(flipped) == mcc(m));
    CHECK(sensitivity(flipped) == specificity(m));
    CHECK(balanced_accuracy(flipped) == balanced_accuracy(m));
    // Swapping raters transposes the off-diagonal cells; kappa is symmetric.
    const auto transposed = matrix(m.tp, m.fn, m.fp, m.tn);
    CHECK(cohen_kappa(transposed).kappa == cohen_kappa(m).kappa);

    const auto se = sensitivity(m), sp = specificity(m);
    if (se && sp) CHECK(*balanced_accuracy(m) == (*se + *sp) / 2);
  }
  const auto perfect = matrix(7, 0, 0, 9);
  CHECK(*mcc(perfect) == 1.0);
  CHECK(*cohen_kappa(perfect).kappa == 1.0);
  CHECK(*mcc(matrix(0, 9, 7, 0)) == -1.0);
}

TEST_CASE("quantile_sorted is type 7") {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  CHECK(quantile_sorted(v, 0.0) == 1);
  CHECK(quantile_sorted(v, 1.0) == 5);
  CHECK(quantile_sorted(v, 0.5) == 3);
  CHECK(quantile_sorted(v, 0.1) == doctest::Approx(1.4));
  CHECK(quantile_sorted({4.0}, 0.3) == 4.0);
  CHECK_THROWS(quantile_sorted({}, 0.5));
}

TEST_CASE("bootstrap is reproducible, worker-independent and covers the point") {
  auto pairs = pairs_for(matrix(60, 10, 15, 55));
  pairs.push_back({Outcome::skip, Label::POL});
  BootstrapConfig cfg;
  cfg.resamples = 500;
  cfg.seed = 99;
  const auto a = bootstrap_ci(pairs, accuracy, cfg);
  const auto b = bootstrap_ci(pairs, accuracy, cfg);
  auto threaded = cfg;
  threaded.workers = 4;
  const auto c = bootstrap_ci(pairs, accuracy, threaded);
  REQUIRE(a.has_value());
  CHECK(*a == *b);
  CHECK(*a == *c);
  const double point = 115.0 / 140.0;
  CHECK(a->low <= point);
  CHECK(a->high >= point);
  CHECK(a->high - a->low < 0.2);
  auto other = cfg;
  other.seed = 100;
  CHECK_FALSE(*bootstrap_ci(pairs, accuracy, other) == *a);

  CHECK_THROWS_AS(bootstrap_ci(pairs_for(matrix(2, 2, 2, 2)), accuracy, cfg), std::invalid_argument);
  cfg.resamples = 50;
  CHECK_THROWS_AS(bootstrap_ci(pairs, accuracy, cfg), std::invalid_argument);
}

TEST_CASE("bootstrap is undefined when the metric mostly is") {
  // One POL item among many NON: sensitivity is undefined on ~1/e of resamples.
  auto pairs = pairs_for(matrix(1, 0, 0, 30));
  CHECK_FALSE(bootstrap_ci(pairs, sensitivity, {}).has_value());
  CHECK(bootstrap_ci(pairs, accuracy, {}).has_value());
}

TEST_CASE("reports round-trip through JSON") {
  auto pairs = pairs_for(matrix(20, 5, 4, 30));
  pairs.push_back({Outcome::unparseable, Label::NON});
  const auto r = make_report(pairs, {500, 1, 0.95, 1});
  CHECK(r.total_items == 60);
  CHECK(*r.coverage == doctest::Approx(59.0 / 60.0));
  REQUIRE(r.accuracy_ci.has_value());
  REQUIRE(r.f1_yes_ci.has_value());
  const auto back = report_from_json(to_json(r));
  CHECK(back.matrix == r.matrix);
  CHECK(back.accuracy == r.accuracy);
  CHECK(back.accuracy_ci == r.accuracy_ci);
  CHECK(back.f1_yes_ci == r.f1_yes_ci);
  CHECK(back.mcc == r.mcc);
  CHECK(back.kappa_z == r.kappa_z);
  CHECK(to_json(Metric{}).is_null());
  CHECK_FALSE(metric_from_json(nullptr).has_value());
}

TEST_CASE("class and country strata") {
  std::vector<StratItem> items = {
      item(Outcome::yes, Label::POL, 3, Country::FR), item(Outcome::no, Label::POL, std::nullopt, Country::FR),
      item(Outcome::no, Label::NON, std::nullopt, Country::FR), item(Outcome::yes, Label::NON, 8, Country::DE),
      item(Outcome::yes, Label::POL, 2, Country::DE), item(Outcome::skip, Label::NON, std::nullopt, Country::DE),
  };
  std::vector<std::string> warnings;
  const auto by_class = agreement_by_class(items, &warnings);
  CHECK(*by_class.at("POL") == doctest::Approx(2.0 / 3.0));
  CHECK(*by_class.at("NON") == doctest::Approx(0.5));
  const auto by_country = agreement_by_country(items, &warnings);
  CHECK(*by_country.at(Country::FR) == doctest::Approx(0.75));
  CHECK(*by_country.at(Country::DE) == doctest::Approx(0.5));
  CHECK(by_country.count(Country::US) == 0);
  CHECK(warnings.empty());

  std::vector<StratItem> only_pol = {item(Outcome::yes, Label::POL, 5)};
  const auto c = agreement_by_class(only_pol, &warnings);
  CHECK(c.count("NON") == 0);
  CHECK(warnings.size() == 1);
}

TEST_CASE("position curve and the center-filtered agreement") {
  std::vector<StratItem> items;
  for (int p = 1; p <= 10; ++p)
    for (int k = 0; k < 4; ++k) {
      const bool center = p >= 4 && p <= 6;
      items.push_back(item(center && k < 2 ? Outcome::no : Outcome::yes,
                           center && k < 2 ? Label::NON : Label::POL, p));
      items.push_back(item(Outcome::no, Label::NON));
    }
  // Two center items per position are false negatives of POL.
  for (auto& it : items)
    if (it.text_position && *it.text_position >= 4 && *it.text_position <= 6 &&
        it.predicted == Outcome::no)
      it.gold = Label::POL;
  const auto curve = agreement_by_position(items);
  for (int p = 1; p <= 10; ++p) {
    const auto& cell = curve.cells[p - 1];
    CHECK(cell.count == 4);
    const bool center = p >= 4 && p <= 6;
    CHECK(*cell.agreement == doctest::Approx(center ? 0.5 : 1.0));
  }
  CHECK(*curve.raw_mean == doctest::Approx((7 * 1.0 + 3 * 0.5) / 10));
  CHECK(*curve.weighted_mean == doctest::Approx(34.0 / 40.0));
  CHECK(*filtered_balanced_agreement(items) > *balanced_accuracy([&] {
    ConfusionMatrix m;
    for (const auto& i : items) m.add(i.predicted, i.gold);
    return m;
  }()));
  const auto s = stratify(items);
  CHECK(s.filtered_balanced == filtered_balanced_agreement(items));
  const auto back = strata_from_json(to_json(s));
  CHECK(back.filtered_balanced == s.filtered_balanced);
  CHECK(back.by_position.cells[4].count == 4);
}

TEST_CASE("position diagnostics need positions for most POL items") {
  std::vector<StratItem> items = {item(Outcome::yes, Label::POL, 4), item(Outcome::no, Label::POL),
                                  item(Outcome::no, Label::POL), item(Outcome::no, Label::NON)};
  CHECK_THROWS_AS(agreement_by_position(items), DiagnosticError);
  const auto s = stratify(items);
  CHECK_FALSE(s.warnings.empty());
  for (const auto& c : s.by_position.cells) CHECK(c.count == 0);
}
