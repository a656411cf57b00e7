#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polurl/common.hpp"

namespace polurl::corpus {

enum class Device { desktop, mobile, tablet };
std::string_view to_string(Device d);
std::optional<Device> parse_device(std::string_view s);

struct VisitRecord {
  std::string visit_id;
  std::string panelist_id;
  std::string url;
  UtcInstant timestamp;
  double duration_seconds = 0.0;
  Device device = Device::desktop;
  Country country = Country::US;

  bool operator==(const VisitRecord&) const = default;
};

nlohmann::json to_json(const VisitRecord& v);
// Throws DataError naming the offending field.
VisitRecord visit_from_json(const nlohmann::json& j);

enum class VisitFormat { csv, jsonl };
std::optional<VisitFormat> parse_visit_format(std::string_view s);

struct MalformedRow {
  std::size_t line = 0;  // 1-based physical line in the input file
  std::string reason;
};

struct IngestResult {
  std::vector<VisitRecord> visits;
  std::vector<MalformedRow> malformed;
};

struct IngestOptions {
  // Ceiling on the malformed share before ingestion is abandoned.
  double max_malformed_share = 0.10;
  // Shorter logs report malformed rows but never abort.
  std::size_t min_rows_for_share_check = 20;
};

// Reads a visit log. CSV needs the header
// visit_id,panelist_id,url,timestamp,duration_seconds,device,country
// (any column order); JSONL uses the same field names. Throws DataError when
// the file is unreadable, the header is wrong, or more than 10% of the rows
// are malformed; the message then lists the offending rows.
IngestResult ingest_visits(const std::string& path, VisitFormat format,
                           const IngestOptions& options = {});

// RFC 4180 field splitting for a single record (quoted fields may not span lines).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace polurl::corpus
