#include "polurl/report/audit.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "polurl/corpus/dataset.hpp"

namespace polurl::report {

namespace {

constexpr double kSlack = 1e-9;

std::optional<std::pair<double, double>> read_ci(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& a = j.at(key);
  return std::make_pair(a.at(0).get<double>(), a.at(1).get<double>());
}

bool near_pct(const metrics::Metric& v, double published, double tol) {
  return v && std::fabs(*v * 100.0 - published) <= tol + kSlack;
}

bool near_coef(const metrics::Metric& v, double published, double tol) {
  return v && std::fabs(*v - published) <= tol + kSlack;
}

}  // namespace

std::vector<PublishedRow> load_published(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
    std::vector<PublishedRow> rows;
    for (const auto& j : doc.at("rows")) {
      PublishedRow r;
      r.model = j.at("model").get<std::string>();
      r.source = j.at("source").get<std::string>();
      r.accuracy = j.at("accuracy").get<double>();
      r.balanced_accuracy = j.at("balanced_accuracy").get<double>();
      r.f1_yes = j.at("f1_yes").get<double>();
      r.specificity = j.at("specificity").get<double>();
      r.mcc = j.at("mcc").get<double>();
      r.kappa = j.at("kappa").get<double>();
      r.accuracy_ci = read_ci(j, "accuracy_ci");
      r.f1_ci = read_ci(j, "f1_ci");
      rows.push_back(std::move(r));
    }
    if (rows.empty()) throw DataError(path + ": no rows");
    return rows;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

nlohmann::json to_json(const PublishedRow& r) {
  nlohmann::json j = {{"model", r.model},
                      {"source", r.source},
                      {"accuracy", r.accuracy},
                      {"balanced_accuracy", r.balanced_accuracy},
                      {"f1_yes", r.f1_yes},
                      {"specificity", r.specificity},
                      {"mcc", r.mcc},
                      {"kappa", r.kappa}};
  if (r.accuracy_ci) j["accuracy_ci"] = {r.accuracy_ci->first, r.accuracy_ci->second};
  if (r.f1_ci) j["f1_ci"] = {r.f1_ci->first, r.f1_ci->second};
  return j;
}

bool matrix_reproduces(const metrics::ConfusionMatrix& m, const PublishedRow& row,
                       const AuditTolerance& tol) {
  return near_pct(metrics::specificity(m), row.specificity, tol.percent) &&
         near_pct(metrics::balanced_accuracy(m), row.balanced_accuracy, tol.percent) &&
         near_pct(metrics::accuracy(m), row.accuracy, tol.percent) &&
         near_pct(metrics::f1_yes(m), row.f1_yes, tol.percent) &&
         near_coef(metrics::mcc(m), row.mcc, tol.coefficient) &&
         near_coef(metrics::cohen_kappa(m).kappa, row.kappa, tol.coefficient);
}

AuditResult audit_row(const PublishedRow& row, int max_n, const AuditTolerance& tol) {
  AuditResult result;
  result.row = row;
  const double spec_lo = (row.specificity - tol.percent) / 100.0;
  const double spec_hi = (row.specificity + tol.percent) / 100.0;
  const double bal_lo = (row.balanced_accuracy - tol.percent) / 100.0;
  const double bal_hi = (row.balanced_accuracy + tol.percent) / 100.0;
  for (std::int64_t n = 2; n <= max_n; ++n) {
    for (std::int64_t pos = 1; pos < n; ++pos) {
      const std::int64_t neg = n - pos;
      const auto tn_lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(spec_lo * neg - 1e-6)));
      const auto tn_hi = std::min<std::int64_t>(neg, static_cast<std::int64_t>(std::floor(spec_hi * neg + 1e-6)));
      for (std::int64_t tn = tn_lo; tn <= tn_hi; ++tn) {
        const double spec = static_cast<double>(tn) / static_cast<double>(neg);
        const double sens_lo = 2 * bal_lo - spec;
        const double sens_hi = 2 * bal_hi - spec;
        const auto tp_lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(sens_lo * pos - 1e-6)));
        const auto tp_hi = std::min<std::int64_t>(pos, static_cast<std::int64_t>(std::floor(sens_hi * pos + 1e-6)));
        for (std::int64_t tp = tp_lo; tp <= tp_hi; ++tp) {
          metrics::ConfusionMatrix m;
          m.tp = tp;
          m.fn = pos - tp;
          m.tn = tn;
          m.fp = neg - tn;
          if (!matrix_reproduces(m, row, tol)) continue;
          if (!result.matrix) result.matrix = m;
          ++result.matches;
        }
      }
    }
  }
  result.consistent = result.matrix.has_value();
  return result;
}

std::vector<AuditResult> audit_published(const std::vector<PublishedRow>& rows, int max_n,
                                         const AuditTolerance& tol, std::size_t workers) {
  std::vector<AuditResult> out(rows.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < rows.size();) out[i] = audit_row(rows[i], max_n, tol);
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, rows.size()));
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < n; ++w) pool.emplace_back(work);
  pool.clear();
  return out;
}

PublishedRow corrupt_accuracy(PublishedRow row, double delta_pp) {
  row.model += " (corrupted)";
  row.accuracy += delta_pp;
  return row;
}

nlohmann::json to_json(const AuditResult& r) {
  nlohmann::json j = {{"published", to_json(r.row)},
                      {"consistent", r.consistent},
                      {"matches", r.matches},
                      {"matrix", nullptr}};
  if (r.matrix) {
    const auto& m = *r.matrix;
    j["matrix"] = {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}, {"n", m.n()}};
    j["recomputed"] = {{"accuracy", metrics::to_json(metrics::accuracy(m))},
                       {"balanced_accuracy", metrics::to_json(metrics::balanced_accuracy(m))},
                       {"f1_yes", metrics::to_json(metrics::f1_yes(m))},
                       {"specificity", metrics::to_json(metrics::specificity(m))},
                       {"mcc", metrics::to_json(metrics::mcc(m))},
                       {"kappa", metrics::to_json(metrics::cohen_kappa(m).kappa)}};
  }
  return j;
}

}  // namespace polurl::report
