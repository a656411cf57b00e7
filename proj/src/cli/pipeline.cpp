#include "polurl/cli/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "polurl/annotation/server.hpp"
#include "polurl/annotation/store.hpp"
#include "polurl/corpus/dataset.hpp"
#include "polurl/corpus/fetch.hpp"
#include "polurl/corpus/outlets.hpp"
#include "polurl/corpus/sampling.hpp"
#include "polurl/corpus/visits.hpp"
#include "polurl/gateway/gateway.hpp"
#include "polurl/metrics/metrics.hpp"
#include "polurl/prompt/template.hpp"
#include "polurl/report/audit.hpp"
#include "polurl/report/tables.hpp"

namespace polurl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

StageError::StageError(const std::string& missing, const std::string& required_stage)
    : DataError(missing + " not found; run `polurl " + required_stage + "` first"),
      stage_(required_stage) {}

namespace layout {
namespace {
std::string under(const RunConfig& c, const fs::path& rel) {
  return (fs::path(c.out_dir) / rel).string();
}
}  // namespace
std::string visits(const RunConfig& c) { return under(c, "visits.jsonl"); }
std::string ingest_report(const RunConfig& c) { return under(c, "ingest_report.json"); }
std::string filtered(const RunConfig& c) { return under(c, "filtered.jsonl"); }
std::string dataset_dir(const RunConfig& c) { return under(c, "dataset"); }
std::string predictions_dir(const RunConfig& c) { return under(c, "predictions"); }
std::string predictions(const RunConfig& c, const std::string& backend, Mode mode) {
  return under(c, fs::path("predictions") / (backend + "__" + std::string(short_name(mode)) + ".jsonl"));
}
std::string metrics(const RunConfig& c) { return under(c, "metrics.json"); }
std::string diagnostics(const RunConfig& c) { return under(c, "diagnostics.json"); }
std::string report_dir(const RunConfig& c) { return under(c, fs::path("reports") / c.run_id); }
std::string annotation_log(const RunConfig& c) { return under(c, fs::path("annotation") / "events.jsonl"); }
std::string gold(const RunConfig& c) {
  return c.gold_path.empty() ? under(c, fs::path("annotation") / "gold.jsonl") : c.gold_path;
}
}  // namespace layout

namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

bool write_out(const std::string& path, std::string_view content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return write_file_if_changed(path, content);
}

std::vector<corpus::VisitRecord> read_visits(const std::string& path, const std::string& stage) {
  if (!fs::exists(path)) throw StageError(path, stage);
  std::vector<corpus::VisitRecord> out;
  for (const auto& row : corpus::read_jsonl(path)) out.push_back(corpus::visit_from_json(row));
  return out;
}

std::string visits_jsonl(const std::vector<corpus::VisitRecord>& visits) {
  std::vector<json> rows;
  rows.reserve(visits.size());
  for (const auto& v : visits) rows.push_back(corpus::to_json(v));
  return corpus::to_jsonl(rows);
}

corpus::Dataset read_dataset(const RunConfig& c) {
  const auto dir = layout::dataset_dir(c);
  if (!fs::exists(fs::path(dir) / "manifest.json")) throw StageError(dir, "sample");
  return corpus::load_dataset(dir);
}

metrics::Outcome outcome_of(const gateway::Prediction& p) {
  if (!p.answer) return metrics::Outcome::unparseable;
  switch (p.answer->verdict) {
    case prompt::Verdict::yes: return metrics::Outcome::yes;
    case prompt::Verdict::no: return metrics::Outcome::no;
    case prompt::Verdict::skip: return metrics::Outcome::skip;
  }
  return metrics::Outcome::unparseable;
}

std::vector<gateway::Prediction> read_predictions(const std::string& path) {
  std::vector<gateway::Prediction> out;
  for (const auto& row : corpus::read_jsonl(path)) out.push_back(gateway::prediction_from_json(row));
  return out;
}

std::string run_key(const std::string& backend, Mode mode) {
  return backend + "/" + std::string(short_name(mode));
}

std::vector<metrics::ScoredPair> pairs_of(const std::vector<metrics::StratItem>& items) {
  std::vector<metrics::ScoredPair> pairs;
  pairs.reserve(items.size());
  for (const auto& it : items) pairs.push_back({it.predicted, it.gold});
  return pairs;
}

json diagnostics_json(const std::vector<ScoredRun>& runs) {
  json out = json::object();
  for (const auto& r : runs) out[run_key(r.backend, r.mode)] = metrics::to_json(metrics::stratify(r.items));
  return {{"runs", out}};
}

}  // namespace

StageResult run_ingest(const RunConfig& c) {
  if (c.visits_path.empty()) throw gateway::ConfigError("[run] visits is not set");
  const auto result = corpus::ingest_visits(c.visits_path, c.visits_format);
  json report = {{"source", fs::path(c.visits_path).filename().string()},
                 {"accepted", result.visits.size()},
                 {"malformed", json::array()}};
  for (const auto& m : result.malformed)
    report["malformed"].push_back({{"line", m.line}, {"reason", m.reason}});
  bool changed = write_out(layout::visits(c), visits_jsonl(result.visits));
  changed |= write_out(layout::ingest_report(c), dump(report));
  return {"ingested " + std::to_string(result.visits.size()) + " visits, " +
              std::to_string(result.malformed.size()) + " malformed rows",
          changed};
}

StageResult run_filter(const RunConfig& c) {
  const auto visits = read_visits(layout::visits(c), "ingest");
  if (c.outlet_paths.empty()) throw gateway::ConfigError("[outlets] has no entries");
  corpus::OutletLists lists;
  for (const auto& [country, path] : c.outlet_paths)
    lists[country] = corpus::load_outlet_list(path, country);
  const auto kept = corpus::filter_by_outlets(visits, lists);
  const bool changed = write_out(layout::filtered(c), visits_jsonl(kept));
  return {"kept " + std::to_string(kept.size()) + " of " + std::to_string(visits.size()) +
              " visits on listed outlets",
          changed};
}

StageResult run_sample(const RunConfig& c) {
  const auto filtered = read_visits(layout::filtered(c), "filter");
  std::vector<corpus::VisitRecord> sample;
  if (c.sample_per_country > 0) {
    sample = corpus::sample_visits_stratified(filtered, c.sample_per_country, c.seed);
  } else if (c.sample_size > 0) {
    sample = corpus::sample_visits(filtered, c.sample_size, c.seed);
  } else {
    sample = filtered;
  }
  std::vector<corpus::ArticleRecord> items;
  items.reserve(sample.size());
  for (const auto& v : sample) items.push_back(corpus::article_for_visit(v));

  // Keep fetched content when the sample itself is unchanged.
  const auto dir = layout::dataset_dir(c);
  if (fs::exists(fs::path(dir) / "manifest.json")) {
    const auto existing = corpus::load_dataset(dir);
    bool same = existing.items.size() == items.size() &&
                existing.manifest.sample_seed == c.seed &&
                existing.manifest.dataset_id == c.dataset_id;
    for (std::size_t i = 0; same && i < items.size(); ++i)
      same = existing.items[i].item_id == items[i].item_id && existing.items[i].url == items[i].url;
    if (same) return {"sample unchanged (" + std::to_string(items.size()) + " items)", false};
  }
  corpus::Dataset ds{corpus::make_manifest(c.dataset_id, c.seed, c.digest, items), items};
  const bool changed = corpus::save_dataset(dir, ds);
  return {"sampled " + std::to_string(items.size()) + " items", changed};
}

StageResult run_fetch(const RunConfig& c, bool refetch) {
  auto ds = read_dataset(c);
  std::unique_ptr<corpus::PageSource> source;
  if (c.snapshot_path.empty()) {
    source = std::make_unique<corpus::HttpPageSource>();
  } else {
    source = std::make_unique<corpus::SnapshotPageSource>(c.snapshot_path);
  }
  std::vector<std::size_t> todo;
  std::vector<corpus::ArticleRecord> pending;
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    if (!refetch && ds.items[i].fetch_status != corpus::FetchStatus::not_fetched) continue;
    todo.push_back(i);
    pending.push_back(ds.items[i]);
  }
  corpus::FetchOptions opts;
  opts.workers = c.workers;
  auto fetched = corpus::fetch_all(*source, pending, opts);
  for (std::size_t k = 0; k < todo.size(); ++k) ds.items[todo[k]] = std::move(fetched[k]);
  ds.manifest = corpus::make_manifest(ds.manifest.dataset_id, ds.manifest.sample_seed,
                                      ds.manifest.config_digest, ds.items);
  const bool changed = corpus::save_dataset(layout::dataset_dir(c), ds);
  std::string counts;
  for (const auto& [status, n] : ds.manifest.counts_by_status)
    counts += (counts.empty() ? "" : ", ") + status + " " + std::to_string(n);
  return {"fetched " + std::to_string(todo.size()) + " items (" + counts + ")", changed};
}

StageResult run_classify(const RunConfig& c, const std::string& backend_id, Mode mode) {
  const auto it = c.backends.find(backend_id);
  if (it == c.backends.end()) throw gateway::ConfigError("no [backend." + backend_id + "] section");
  const auto& backend = it->second;
  const auto ds = read_dataset(c);

  std::string template_id = mode == Mode::full_text ? c.text_template : c.url_template;
  const std::string& override_id =
      mode == Mode::full_text ? backend.text_template : backend.url_template;
  if (!override_id.empty()) template_id = override_id;
  const auto tmpl = prompt::load_template(c.prompts_dir, template_id, c.enable_skip);
  if (tmpl.mode != mode)
    throw prompt::TemplateError("template " + template_id + " is not a " +
                                std::string(to_string(mode)) + " template");

  std::vector<corpus::ArticleRecord> items;
  bool any_fetched = false;
  for (const auto& item : ds.items) {
    if (item.fetch_status != corpus::FetchStatus::not_fetched) any_fetched = true;
    if (mode == Mode::url_only || item.fetch_status == corpus::FetchStatus::ok) items.push_back(item);
  }
  if (mode == Mode::full_text && !any_fetched) throw StageError("fetched article text", "fetch");

  gateway::Gateway gw(backend, c.cache_dir);
  gateway::ClassifyOptions opts;
  opts.truncation_chars = c.truncation_chars;
  opts.workers = c.workers;
  const auto batch = gateway::classify_all(items, mode, tmpl, gw, opts);

  std::vector<json> rows;
  std::size_t unparseable = 0;
  for (const auto& p : batch.predictions) {
    rows.push_back(gateway::to_json(p));
    if (p.unparseable()) ++unparseable;
  }
  const auto path = layout::predictions(c, backend_id, mode);
  bool changed = write_out(path, corpus::to_jsonl(rows));
  json summary = {{"backend", backend_id},
                  {"mode", short_name(mode)},
                  {"template_id", tmpl.template_id},
                  {"items", rows.size()},
                  {"unparseable", unparseable},
                  {"parse_counters", batch.counters.to_json()}};
  changed |= write_out(path.substr(0, path.size() - 6) + ".summary.json", dump(summary));
  return {"classified " + std::to_string(rows.size()) + " items with " + backend_id + "/" +
              std::string(short_name(mode)) + " (" + std::to_string(gw.network_calls()) +
              " network calls, " + std::to_string(gw.cache_hits()) + " cache hits, " +
              std::to_string(unparseable) + " unparseable)",
          changed};
}

std::vector<ScoredRun> load_scored_runs(const RunConfig& c) {
  const auto ds = read_dataset(c);
  std::map<std::string, Country> country;
  for (const auto& item : ds.items) country[item.item_id] = item.country;

  const auto gold_path = layout::gold(c);
  if (!fs::exists(gold_path)) throw StageError(gold_path, "serve --annotation");
  metrics::GoldMap gold;
  for (const auto& row : corpus::read_jsonl(gold_path)) {
    const auto g = annotation::gold_from_json(row);
    if (g.final_label) gold[g.item_id] = *g.final_label;
  }

  const auto dir = layout::predictions_dir(c);
  std::vector<std::pair<std::string, Mode>> files;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (entry.path().extension() != ".jsonl") continue;
      const auto sep = name.rfind("__");
      if (sep == std::string::npos) continue;
      const auto mode = parse_mode(name.substr(sep + 2, name.size() - sep - 2 - 6));
      if (!mode) continue;
      files.emplace_back(name.substr(0, sep), *mode);
    }
  }
  if (files.empty()) throw StageError("predictions in " + dir, "classify");
  std::sort(files.begin(), files.end());

  std::vector<ScoredRun> runs;
  for (const auto& [backend, mode] : files) {
    std::map<std::string, int> positions;
    const auto text_path = layout::predictions(c, backend, Mode::full_text);
    if (fs::exists(text_path)) {
      for (const auto& p : read_predictions(text_path))
        if (p.answer && p.answer->political_position)
          positions[p.item_id] = *p.answer->political_position;
    }
    ScoredRun run;
    run.backend = backend;
    run.mode = mode;
    for (const auto& p : read_predictions(layout::predictions(c, backend, mode))) {
      const auto g = gold.find(p.item_id);
      if (g == gold.end()) {
        ++run.without_gold;
        continue;
      }
      metrics::StratItem item;
      item.item_id = p.item_id;
      item.predicted = outcome_of(p);
      item.gold = g->second;
      const auto ct = country.find(p.item_id);
      if (ct == country.end()) throw DataError("prediction for unknown item " + p.item_id);
      item.country = ct->second;
      if (const auto pos = positions.find(p.item_id); pos != positions.end())
        item.text_position = pos->second;
      run.items.push_back(std::move(item));
    }
    if (run.items.empty())
      throw DataError("no gold labels for predictions of " + run_key(backend, mode));
    runs.push_back(std::move(run));
  }
  return runs;
}

StageResult run_evaluate(const RunConfig& c) {
  const auto runs = load_scored_runs(c);
  json out = json::object();
  for (const auto& r : runs) {
    const auto pairs = pairs_of(r.items);
    json entry = {{"backend", r.backend},
                  {"mode", short_name(r.mode)},
                  {"without_gold", r.without_gold},
                  {"overall", metrics::to_json(metrics::make_report(pairs, c.bootstrap))}};
    std::map<Country, std::vector<metrics::ScoredPair>> by_country;
    for (const auto& it : r.items) by_country[it.country].push_back({it.predicted, it.gold});
    for (const auto& [country, cp] : by_country)
      entry["strata"]["country:" + std::string(to_string(country))] =
          metrics::to_json(metrics::make_report(cp, c.bootstrap, false));
    out[run_key(r.backend, r.mode)] = std::move(entry);
  }
  const json doc = {{"config_digest", c.digest},
                    {"bootstrap",
                     {{"resamples", c.bootstrap.resamples},
                      {"seed", c.bootstrap.seed},
                      {"level", c.bootstrap.level}}},
                    {"runs", out}};
  bool changed = write_out(layout::metrics(c), dump(doc));
  changed |= write_out(layout::diagnostics(c), dump(diagnostics_json(runs)));
  return {"evaluated " + std::to_string(runs.size()) + " runs", changed};
}

StageResult run_diagnose(const RunConfig& c) {
  const auto runs = load_scored_runs(c);
  const bool changed = write_out(layout::diagnostics(c), dump(diagnostics_json(runs)));
  return {"diagnosed " + std::to_string(runs.size()) + " runs", changed};
}

StageResult run_report(const RunConfig& c) {
  const auto started = utc_now();
  if (!fs::exists(layout::metrics(c))) throw StageError(layout::metrics(c), "evaluate");
  if (!fs::exists(layout::diagnostics(c))) throw StageError(layout::diagnostics(c), "diagnose");
  json metrics_doc, diag_doc;
  try {
    metrics_doc = json::parse(read_file(layout::metrics(c)));
    diag_doc = json::parse(read_file(layout::diagnostics(c)));
  } catch (const json::exception& e) {
    throw DataError(std::string("cannot read evaluation outputs: ") + e.what());
  }
  const auto ds = read_dataset(c);

  std::vector<report::RunResult> runs;
  std::set<std::string> backends;
  std::set<std::string> modes;
  try {
    for (const auto& [key, entry] : metrics_doc.at("runs").items()) {
      report::RunResult r;
      r.model = entry.at("backend").get<std::string>();
      const auto mode = parse_mode(entry.at("mode").get<std::string>());
      if (!mode) throw DataError("metrics.json: bad mode for " + key);
      r.mode = *mode;
      r.report = metrics::report_from_json(entry.at("overall"));
      if (!diag_doc.at("runs").contains(key))
        throw StageError("diagnostics for " + key, "diagnose");
      r.strata = metrics::strata_from_json(diag_doc.at("runs").at(key));
      backends.insert(r.model);
      modes.insert(std::string(short_name(r.mode)));
      runs.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed evaluation outputs: ") + e.what());
  }
  if (runs.empty()) throw StageError("evaluated runs", "evaluate");

  const auto dir = fs::path(layout::report_dir(c));
  bool changed = write_out((dir / "table2.csv").string(), report::table_csv(runs));
  changed |= write_out((dir / "table2.json").string(), dump(report::table_json(runs)));
  std::vector<std::string> warnings;
  for (const auto& [name, content] : report::figure_files(runs, &warnings))
    changed |= write_out((dir / name).string(), content);

  report::RunManifest m;
  m.run_id = c.run_id;
  m.dataset_id = ds.manifest.dataset_id;
  m.backend_ids.assign(backends.begin(), backends.end());
  m.modes.assign(modes.begin(), modes.end());
  m.seeds = {{"sample", ds.manifest.sample_seed},
             {"bootstrap", c.bootstrap.seed},
             {"coder_a", c.coder_seed_a},
             {"coder_b", c.coder_seed_b}};
  m.config_digest = c.digest;
  m.started = started;
  m.finished = utc_now();
  json manifest = report::to_json(m);
  manifest["warnings"] = warnings;
  write_out((dir / "manifest.json").string(), dump(manifest));

  std::string summary = "wrote " + std::to_string(runs.size()) + " table rows to " + dir.string();
  for (const auto& w : warnings) summary += "\nwarning: " + w;
  return {summary, changed};
}

StageResult run_audit(const RunConfig& c, const std::string& table_override) {
  const std::string table = table_override.empty() ? c.published_table : table_override;
  if (table.empty()) throw gateway::ConfigError("no published table: set [run] published_table or --table");
  const auto rows = report::load_published(table);
  const auto results = report::audit_published(rows, 1200, {}, c.workers);
  const auto control = report::audit_row(report::corrupt_accuracy(rows.front()), 1200);
  json out = {{"max_n", 1200},
              {"tolerance", {{"percent_points", 0.05}, {"coefficient", 0.005}}},
              {"rows", json::array()},
              {"negative_control", to_json(control)}};
  std::size_t consistent = 0;
  for (const auto& r : results) {
    out["rows"].push_back(to_json(r));
    if (r.consistent) ++consistent;
  }
  out["all_consistent"] = consistent == results.size();
  out["negative_control_flagged"] = !control.consistent;
  const auto path = (fs::path(layout::report_dir(c)) / "audit.json").string();
  const bool changed = write_out(path, dump(out));
  return {std::to_string(consistent) + "/" + std::to_string(results.size()) +
              " published rows reproduced by an integer matrix; negative control " +
              (control.consistent ? "NOT flagged" : "flagged") + "; wrote " + path,
          changed};
}

StageResult export_gold(const RunConfig& c) {
  const auto log = layout::annotation_log(c);
  if (!fs::exists(log)) throw StageError(log, "serve --annotation");
  annotation::AnnotationStore store(log);
  std::vector<json> rows;
  std::size_t final_count = 0;
  for (const auto& g : store.gold_labels()) {
    rows.push_back(annotation::to_json(g));
    if (g.final_label) ++final_count;
  }
  const auto path = (fs::path(c.out_dir) / "annotation" / "gold.jsonl").string();
  const bool changed = write_out(path, corpus::to_jsonl(rows));
  return {"exported " + std::to_string(final_count) + " final labels of " +
              std::to_string(rows.size()) + " items to " + path,
          changed};
}

StageResult run_serve(const RunConfig& c, const std::atomic<bool>& stop_flag,
                      std::atomic<int>* bound_port) {
  const auto ds = read_dataset(c);
  std::map<std::string, annotation::BlindedPayload> payloads;
  std::vector<std::string> ids;
  for (const auto& item : ds.items) {
    payloads[item.item_id] = annotation::make_blinded_payload(item);
    ids.push_back(item.item_id);
  }
  {
    annotation::AnnotationStore store(layout::annotation_log(c));
    if (!store.assigned())
      store.assign_blind(ids, c.coder_a, c.coder_b, c.coder_seed_a, c.coder_seed_b);
    annotation::AnnotationServer server(store, std::move(payloads), c.ui_dir);
    int port = c.annotation_port;
    if (port == 0) {
      port = server.bind_any(c.annotation_host);
      if (port < 0) throw DataError("cannot bind " + c.annotation_host);
    } else if (!server.bind(c.annotation_host, port)) {
      throw DataError("cannot bind " + c.annotation_host + ":" + std::to_string(port));
    }
    if (bound_port) *bound_port = port;
    std::thread loop([&] { server.serve(); });
    while (!stop_flag) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    loop.join();
  }
  return export_gold(c);
}

}  // namespace polurl::cli
