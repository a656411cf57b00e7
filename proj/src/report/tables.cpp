#include "polurl/report/tables.hpp"

#include <array>
#include <charconv>

namespace polurl::report {

std::string_view source_label(Mode m) { return m == Mode::full_text ? "Text" : "URL"; }

std::string format_metric(const metrics::Metric& v) {
  if (!v) return "NA";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), *v);
  return std::string(buf.data(), res.ptr);
}

namespace {

using metrics::Metric;

Metric ci_low(const std::optional<metrics::Interval>& i) {
  return i ? Metric(i->low) : std::nullopt;
}
Metric ci_high(const std::optional<metrics::Interval>& i) {
  return i ? Metric(i->high) : std::nullopt;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string_view> header) { row(header); }
  void row(std::initializer_list<std::string_view> cells) {
    bool first = true;
    for (const auto c : cells) {
      if (!first) out_.push_back(',');
      out_ += csv_field(c);
      first = false;
    }
    out_.push_back('\n');
    ++rows_;
  }
  std::size_t data_rows() const { return rows_ - 1; }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
  std::size_t rows_ = 0;
};

}  // namespace

std::string table_csv(const std::vector<RunResult>& runs) {
  Csv csv({"model", "source", "accuracy", "accuracy_ci_low", "accuracy_ci_high",
           "balanced_accuracy", "f1_yes", "f1_yes_ci_low", "f1_yes_ci_high", "specificity", "mcc",
           "kappa", "n", "excluded_skip", "excluded_unparseable"});
  for (const auto& r : runs) {
    const auto& m = r.report;
    csv.row({r.model, source_label(r.mode), format_metric(m.accuracy),
             format_metric(ci_low(m.accuracy_ci)), format_metric(ci_high(m.accuracy_ci)),
             format_metric(m.balanced_accuracy), format_metric(m.f1_yes),
             format_metric(ci_low(m.f1_yes_ci)), format_metric(ci_high(m.f1_yes_ci)),
             format_metric(m.specificity), format_metric(m.mcc), format_metric(m.kappa),
             std::to_string(m.matrix.n()), std::to_string(m.matrix.excluded_skip),
             std::to_string(m.matrix.excluded_unparseable)});
  }
  return csv.str();
}

nlohmann::json table_json(const std::vector<RunResult>& runs) {
  auto rows = nlohmann::json::array();
  for (const auto& r : runs) {
    nlohmann::json row = metrics::to_json(r.report);
    row["model"] = r.model;
    row["source"] = source_label(r.mode);
    rows.push_back(std::move(row));
  }
  return {{"rows", rows}};
}

std::map<std::string, std::string> figure_files(const std::vector<RunResult>& runs,
                                                std::vector<std::string>* warnings) {
  Csv fig2({"model", "source", "balanced_accuracy"});
  Csv fig3({"model", "source", "country", "balanced_accuracy"});
  Csv fig4({"model", "source", "precision", "recall"});
  Csv fig5({"model", "source", "class", "agreement"});
  Csv fig6({"model", "source", "position", "agreement", "count"});
  Csv fig7({"model", "source", "unfiltered_balanced", "filtered_balanced"});
  for (const auto& r : runs) {
    const std::string_view src = source_label(r.mode);
    fig2.row({r.model, src, format_metric(r.report.balanced_accuracy)});
    for (const auto& [country, v] : r.strata.by_country)
      fig3.row({r.model, src, to_string(country), format_metric(v)});
    fig4.row({r.model, src, format_metric(r.report.precision), format_metric(r.report.sensitivity)});
    for (const auto& [cls, v] : r.strata.by_class) fig5.row({r.model, src, cls, format_metric(v)});
    const auto& curve = r.strata.by_position;
    std::int64_t total = 0;
    for (int p = 0; p < 10; ++p) {
      const auto& cell = curve.cells[p];
      total += cell.count;
      if (cell.count == 0) continue;
      fig6.row({r.model, src, std::to_string(p + 1), format_metric(cell.agreement),
                std::to_string(cell.count)});
    }
    if (total > 0) {
      fig6.row({r.model, src, "mean_raw", format_metric(curve.raw_mean), std::to_string(total)});
      fig6.row({r.model, src, "mean_weighted", format_metric(curve.weighted_mean),
                std::to_string(total)});
    }
    fig7.row({r.model, src, format_metric(r.strata.unfiltered_balanced),
              format_metric(r.strata.filtered_balanced)});
  }
  std::map<std::string, std::string> files;
  const std::pair<const char*, const Csv*> all[] = {{"fig2.csv", &fig2}, {"fig3.csv", &fig3},
                                                    {"fig4.csv", &fig4}, {"fig5.csv", &fig5},
                                                    {"fig6.csv", &fig6}, {"fig7.csv", &fig7}};
  for (const auto& [name, csv] : all) {
    if (csv->data_rows() == 0) {
      if (warnings) warnings->push_back(std::string(name) + " omitted: no data");
      continue;
    }
    files[name] = csv->str();
  }
  return files;
}

nlohmann::json to_json(const RunManifest& m) {
  return {{"run_id", m.run_id},
          {"dataset_id", m.dataset_id},
          {"backend_ids", m.backend_ids},
          {"modes", m.modes},
          {"seeds", m.seeds},
          {"config_digest", m.config_digest},
          {"started", format_rfc3339(m.started)},
          {"finished", format_rfc3339(m.finished)}};
}

}  // namespace polurl::report
