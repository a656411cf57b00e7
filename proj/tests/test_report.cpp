#include <doctest.h>

#include <sstream>

#include "polurl/common.hpp"
#include "polurl/metrics/metrics.hpp"
#include "polurl/report/audit.hpp"
#include "polurl/report/tables.hpp"
#include "support.hpp"

using namespace polurl;
using namespace polurl::report;
using testing_support::source_path;

namespace {

metrics::ConfusionMatrix matrix(std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn) {
  metrics::ConfusionMatrix m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  return m;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

// A row printed from a known matrix with the table's rounding.
PublishedRow row_from(const metrics::ConfusionMatrix& m) {
  PublishedRow r;
  r.model = "fixture";
  r.source = "Text";
  r.accuracy = round_to(100 * *metrics::accuracy(m), 0.1);
  r.balanced_accuracy = round_to(100 * *metrics::balanced_accuracy(m), 0.1);
  r.f1_yes = round_to(100 * *metrics::f1_yes(m), 0.1);
  r.specificity = round_to(100 * *metrics::specificity(m), 0.1);
  r.mcc = round_to(*metrics::mcc(m), 0.01);
  r.kappa = round_to(*metrics::cohen_kappa(m).kappa, 0.01);
  return r;
}

RunResult run(const std::string& model, Mode mode, const metrics::ConfusionMatrix& m) {
  RunResult r;
  r.model = model;
  r.mode = mode;
  r.report.matrix = m;
  r.report.accuracy = metrics::accuracy(m);
  r.report.balanced_accuracy = metrics::balanced_accuracy(m);
  r.report.f1_yes = metrics::f1_yes(m);
  r.report.sensitivity = metrics::sensitivity(m);
  r.report.specificity = metrics::specificity(m);
  r.report.precision = metrics::precision(m);
  r.report.mcc = metrics::mcc(m);
  r.report.kappa = metrics::cohen_kappa(m).kappa;
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("published table fixture has ten rows") {
  const auto rows = load_published(source_path("data/table2_published.json"));
  REQUIRE(rows.size() == 10);
  CHECK(rows[0].model == "Deepseek");
  CHECK(rows[0].source == "Text");
  CHECK(rows[0].accuracy == 82.4);
  CHECK(rows[0].balanced_accuracy == 68.5);
  CHECK(rows[0].f1_yes == 89.1);
  CHECK(rows[0].specificity == 40.6);
  CHECK(rows[0].mcc == 0.48);
  int text = 0, url = 0;
  for (const auto& r : rows) (r.source == "Text" ? text : url)++;
  CHECK(text == 5);
  CHECK(url == 5);
}

TEST_CASE("audit recovers a matrix that prints like the row") {
  const auto truth = matrix(143, 19, 22, 101);
  const auto row = row_from(truth);
  CHECK(matrix_reproduces(truth, row));
  const auto r = audit_row(row, 400);
  CHECK(r.consistent);
  REQUIRE(r.matrix.has_value());
  CHECK(matrix_reproduces(*r.matrix, row));
  CHECK(r.matrix->n() <= truth.n());
  CHECK(r.matches >= 1);
}

TEST_CASE("audit flags corrupted rows") {
  const auto row = row_from(matrix(143, 19, 22, 101));
  const auto bad = corrupt_accuracy(row, 5.0);
  CHECK(bad.accuracy == doctest::Approx(row.accuracy + 5.0));
  const auto r = audit_row(bad, 600);
  CHECK_FALSE(r.consistent);
  CHECK_FALSE(r.matrix.has_value());
  CHECK(r.matches == 0);
  const auto j = to_json(r);
  CHECK(j["consistent"] == false);
}

TEST_CASE("audit_published keeps input order") {
  const auto a = row_from(matrix(30, 5, 6, 40));
  auto b = row_from(matrix(50, 20, 10, 30));
  b.model = "second";
  const auto results = audit_published({a, b, corrupt_accuracy(a)}, 200, {}, 3);
  REQUIRE(results.size() == 3);
  CHECK(results[0].row.model == "fixture");
  CHECK(results[1].row.model == "second");
  CHECK(results[0].consistent);
  CHECK(results[1].consistent);
  CHECK_FALSE(results[2].consistent);
}

TEST_CASE("metric formatting") {
  CHECK(format_metric(std::nullopt) == "NA");
  CHECK(format_metric(0.5) == "0.5");
  CHECK(format_metric(0.1) == "0.1");
  CHECK(format_metric(1.0 / 3.0) == "0.3333333333333333");
  CHECK(source_label(Mode::full_text) == "Text");
  CHECK(source_label(Mode::url_only) == "URL");
}

TEST_CASE("table2 csv has the documented columns and one row per run") {
  auto text = run("m1", Mode::full_text, matrix(40, 20, 10, 30));
  auto url = run("m1", Mode::url_only, matrix(0, 0, 10, 30));
  url.report.matrix.excluded_skip = 7;
  const auto csv = lines(table_csv({text, url}));
  REQUIRE(csv.size() == 3);
  CHECK(csv[0] ==
        "model,source,accuracy,accuracy_ci_low,accuracy_ci_high,balanced_accuracy,f1_yes,"
        "f1_yes_ci_low,f1_yes_ci_high,specificity,mcc,kappa,n,excluded_skip,excluded_unparseable");
  CHECK(csv[1].rfind("m1,Text,0.7,NA,NA,0.7,", 0) == 0);
  CHECK(csv[2].find(",URL,") != std::string::npos);
  CHECK(csv[2].substr(csv[2].size() - 7) == ",40,7,0");
  const auto j = table_json({text, url});
  CHECK(j["rows"].size() == 2);
}

TEST_CASE("figures are emitted per run and empty ones are reported") {
  auto r = run("m1", Mode::full_text, matrix(40, 20, 10, 30));
  r.strata.by_class = {{"POL", 0.8}, {"NON", 0.6}};
  r.strata.by_country = {{Country::FR, 0.7}};
  r.strata.unfiltered_balanced = 0.7;
  r.strata.filtered_balanced = 0.75;
  std::vector<std::string> warnings;
  const auto figs = figure_files({r}, &warnings);
  CHECK(figs.count("fig2.csv") == 1);
  CHECK(figs.count("fig3.csv") == 1);
  CHECK(figs.count("fig6.csv") == 0);
  CHECK(warnings.size() == 1);
  CHECK(lines(figs.at("fig5.csv")).size() == 3);
  CHECK(lines(figs.at("fig7.csv"))[1] == "m1,Text,0.7,0.75");
}

TEST_CASE("run manifest json") {
  RunManifest m;
  m.run_id = "r1";
  m.backend_ids = {"mock"};
  m.modes = {"text", "url"};
  m.seeds = {{"sample", 3}};
  const auto j = to_json(m);
  CHECK(j["run_id"] == "r1");
  CHECK(j["seeds"]["sample"] == 3);
}
