#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polurl/common.hpp"
#include "polurl/corpus/visits.hpp"

namespace polurl::corpus {

enum class FetchStatus { ok, moved, inaccessible, not_fetched };
std::string_view to_string(FetchStatus s);
std::optional<FetchStatus> parse_fetch_status(std::string_view s);

struct ArticleRecord {
  std::string item_id;
  std::string url;
  Country country = Country::US;
  FetchStatus fetch_status = FetchStatus::not_fetched;
  std::optional<std::string> title;
  std::optional<std::string> body_text;  // present iff fetch_status == ok
  std::optional<UtcInstant> fetched_at;

  bool operator==(const ArticleRecord&) const = default;
};

nlohmann::json to_json(const ArticleRecord& a);
// Throws DataError on schema violations, including body_text/status mismatch.
ArticleRecord article_from_json(const nlohmann::json& j);

// Unfetched item for a sampled visit; item_id is the visit_id.
ArticleRecord article_for_visit(const VisitRecord& v);

struct DatasetManifest {
  std::string dataset_id;
  std::uint64_t sample_seed = 0;
  std::map<std::string, std::size_t> counts_by_country;
  std::map<std::string, std::size_t> counts_by_status;
  std::size_t total_items = 0;
  std::string config_digest;

  bool operator==(const DatasetManifest&) const = default;
};

nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

// Recomputes the per-country and per-status counts from the items.
DatasetManifest make_manifest(std::string dataset_id, std::uint64_t sample_seed,
                              std::string config_digest, const std::vector<ArticleRecord>& items);

// Dataset directory layout: items.jsonl + manifest.json.
struct Dataset {
  DatasetManifest manifest;
  std::vector<ArticleRecord> items;
};

// Throws DataError on duplicate item ids or when the manifest counts do not
// match the items.
Dataset load_dataset(const std::string& dir);
// Serializes deterministically; returns true if any file changed on disk.
bool save_dataset(const std::string& dir, const Dataset& ds);

// Generic JSONL helpers.
std::vector<nlohmann::json> read_jsonl(const std::string& path);
std::string to_jsonl(const std::vector<nlohmann::json>& rows);

}  // namespace polurl::corpus
