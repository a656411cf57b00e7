#include "polurl/corpus/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <set>

namespace polurl::corpus {

std::string_view to_string(FetchStatus s) {
  switch (s) {
    case FetchStatus::ok: return "ok";
    case FetchStatus::moved: return "moved";
    case FetchStatus::inaccessible: return "inaccessible";
    case FetchStatus::not_fetched: return "not_fetched";
  }
  return "?";
}

std::optional<FetchStatus> parse_fetch_status(std::string_view s) {
  if (s == "ok") return FetchStatus::ok;
  if (s == "moved") return FetchStatus::moved;
  if (s == "inaccessible") return FetchStatus::inaccessible;
  if (s == "not_fetched") return FetchStatus::not_fetched;
  return std::nullopt;
}

nlohmann::json to_json(const ArticleRecord& a) {
  nlohmann::json j;
  j["item_id"] = a.item_id;
  j["url"] = a.url;
  j["country"] = to_string(a.country);
  j["fetch_status"] = to_string(a.fetch_status);
  j["title"] = a.title ? nlohmann::json(*a.title) : nlohmann::json(nullptr);
  j["body_text"] = a.body_text ? nlohmann::json(*a.body_text) : nlohmann::json(nullptr);
  j["fetched_at"] = a.fetched_at ? nlohmann::json(format_rfc3339(*a.fetched_at)) : nlohmann::json(nullptr);
  return j;
}

namespace {

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string(key) + ": expected string");
  return it->get<std::string>();
}

std::string required_string(const nlohmann::json& j, const char* key) {
  auto v = optional_string(j, key);
  if (!v) throw DataError(std::string(key) + ": missing");
  return *v;
}

}  // namespace

ArticleRecord article_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("article record is not an object");
  ArticleRecord a;
  a.item_id = required_string(j, "item_id");
  if (a.item_id.empty()) throw DataError("item_id: empty");
  a.url = required_string(j, "url");
  const auto c = parse_country(required_string(j, "country"));
  if (!c) throw DataError("country: unknown value");
  a.country = *c;
  const auto st = parse_fetch_status(required_string(j, "fetch_status"));
  if (!st) throw DataError("fetch_status: unknown value");
  a.fetch_status = *st;
  a.title = optional_string(j, "title");
  a.body_text = optional_string(j, "body_text");
  if (const auto f = optional_string(j, "fetched_at")) {
    const auto t = parse_rfc3339(*f);
    if (!t) throw DataError("fetched_at: not RFC 3339");
    a.fetched_at = *t;
  }
  if (a.body_text.has_value() != (a.fetch_status == FetchStatus::ok))
    throw DataError("item " + a.item_id + ": body_text must be present iff fetch_status is ok");
  return a;
}

ArticleRecord article_for_visit(const VisitRecord& v) {
  ArticleRecord a;
  a.item_id = v.visit_id;
  a.url = v.url;
  a.country = v.country;
  return a;
}

nlohmann::json to_json(const DatasetManifest& m) {
  return {{"dataset_id", m.dataset_id},
          {"sample_seed", m.sample_seed},
          {"counts_by_country", m.counts_by_country},
          {"counts_by_status", m.counts_by_status},
          {"total_items", m.total_items},
          {"config_digest", m.config_digest}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
  try {
    DatasetManifest m;
    m.dataset_id = j.at("dataset_id").get<std::string>();
    m.sample_seed = j.at("sample_seed").get<std::uint64_t>();
    m.counts_by_country = j.at("counts_by_country").get<std::map<std::string, std::size_t>>();
    m.counts_by_status = j.at("counts_by_status").get<std::map<std::string, std::size_t>>();
    m.total_items = j.at("total_items").get<std::size_t>();
    m.config_digest = j.at("config_digest").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
}

DatasetManifest make_manifest(std::string dataset_id, std::uint64_t sample_seed,
                              std::string config_digest, const std::vector<ArticleRecord>& items) {
  DatasetManifest m;
  m.dataset_id = std::move(dataset_id);
  m.sample_seed = sample_seed;
  m.config_digest = std::move(config_digest);
  for (Country c : kAllCountries) m.counts_by_country[std::string(to_string(c))] = 0;
  for (auto s : {FetchStatus::ok, FetchStatus::moved, FetchStatus::inaccessible,
                 FetchStatus::not_fetched})
    m.counts_by_status[std::string(to_string(s))] = 0;
  for (const auto& a : items) {
    ++m.counts_by_country[std::string(to_string(a.country))];
    ++m.counts_by_status[std::string(to_string(a.fetch_status))];
  }
  m.total_items = items.size();
  return m;
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::vector<nlohmann::json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      rows.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::string to_jsonl(const std::vector<nlohmann::json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto items_path = (fs::path(dir) / "items.jsonl").string();
  const auto manifest_path = (fs::path(dir) / "manifest.json").string();
  if (!fs::exists(items_path) || !fs::exists(manifest_path))
    throw DataError("no dataset in " + dir + " (expected items.jsonl and manifest.json)");
  Dataset ds;
  try {
    ds.manifest = manifest_from_json(nlohmann::json::parse(read_file(manifest_path)));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path + ": " + e.what());
  }
  std::set<std::string> seen;
  for (const auto& row : read_jsonl(items_path)) {
    auto a = article_from_json(row);
    if (!seen.insert(a.item_id).second) throw DataError("duplicate item_id " + a.item_id);
    ds.items.push_back(std::move(a));
  }
  const auto recount = make_manifest(ds.manifest.dataset_id, ds.manifest.sample_seed,
                                     ds.manifest.config_digest, ds.items);
  if (recount.counts_by_status != ds.manifest.counts_by_status ||
      recount.counts_by_country != ds.manifest.counts_by_country ||
      recount.total_items != ds.manifest.total_items)
    throw DataError(dir + ": manifest counts do not match items.jsonl");
  return ds;
}

bool save_dataset(const std::string& dir, const Dataset& ds) {
  namespace fs = std::filesystem;
  std::vector<nlohmann::json> rows;
  rows.reserve(ds.items.size());
  for (const auto& a : ds.items) rows.push_back(to_json(a));
  const bool a = write_file_if_changed((fs::path(dir) / "items.jsonl").string(), to_jsonl(rows));
  const bool b = write_file_if_changed((fs::path(dir) / "manifest.json").string(),
                                       to_json(ds.manifest).dump(2) + "\n");
  return a || b;
}

}  // namespace polurl::corpus
