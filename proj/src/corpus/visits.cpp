#include "polurl/corpus/visits.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "polurl/urlkit/url.hpp"

namespace polurl::corpus {

std::string_view to_string(Device d) {
  switch (d) {
    case Device::desktop: return "desktop";
    case Device::mobile: return "mobile";
    case Device::tablet: return "tablet";
  }
  return "?";
}

std::optional<Device> parse_device(std::string_view s) {
  const auto l = to_lower_ascii(s);
  if (l == "desktop" || l == "laptop") return Device::desktop;
  if (l == "mobile") return Device::mobile;
  if (l == "tablet") return Device::tablet;
  return std::nullopt;
}

std::optional<VisitFormat> parse_visit_format(std::string_view s) {
  if (s == "csv") return VisitFormat::csv;
  if (s == "jsonl") return VisitFormat::jsonl;
  return std::nullopt;
}

nlohmann::json to_json(const VisitRecord& v) {
  return {{"visit_id", v.visit_id},
          {"panelist_id", v.panelist_id},
          {"url", v.url},
          {"timestamp", format_rfc3339(v.timestamp)},
          {"duration_seconds", v.duration_seconds},
          {"device", to_string(v.device)},
          {"country", to_string(v.country)}};
}

namespace {

constexpr std::array<std::string_view, 7> kColumns = {
    "visit_id", "panelist_id", "url", "timestamp", "duration_seconds", "device", "country"};

// Validates one row given as raw field strings; throws DataError.
VisitRecord build_visit(const std::array<std::string, 7>& f) {
  VisitRecord v;
  v.visit_id = f[0];
  if (v.visit_id.empty()) throw DataError("visit_id: empty");
  v.panelist_id = f[1];
  if (v.panelist_id.empty()) throw DataError("panelist_id: empty");
  try {
    const auto canon = urlkit::canonicalize(f[2]);
    if (canon.scheme != "http" && canon.scheme != "https")
      throw DataError("url: unsupported scheme '" + canon.scheme + "'");
  } catch (const urlkit::UrlError& e) {
    throw DataError(std::string("url: ") + e.what());
  }
  v.url = f[2];
  const auto ts = parse_rfc3339(f[3]);
  if (!ts) throw DataError("timestamp: not RFC 3339");
  v.timestamp = *ts;
  double d = 0;
  const auto& ds = f[4];
  auto [p, ec] = std::from_chars(ds.data(), ds.data() + ds.size(), d);
  if (ds.empty() || ec != std::errc{} || p != ds.data() + ds.size() || !std::isfinite(d))
    throw DataError("duration_seconds: not a number");
  if (d < 0) throw DataError("duration_seconds: negative");
  v.duration_seconds = d;
  const auto dev = parse_device(f[5]);
  if (!dev) throw DataError("device: unknown value '" + f[5] + "'");
  v.device = *dev;
  const auto c = parse_country(f[6]);
  if (!c) throw DataError("country: unknown value '" + f[6] + "'");
  v.country = *c;
  return v;
}

std::string field_as_string(const nlohmann::json& j, std::string_view key) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) throw DataError(std::string(key) + ": missing");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number()) return it->dump();
  throw DataError(std::string(key) + ": wrong type");
}

void check_malformed_share(const IngestResult& r, const std::string& path,
                           const IngestOptions& opt) {
  const std::size_t total = r.visits.size() + r.malformed.size();
  if (total == 0 || total < opt.min_rows_for_share_check) return;
  const double share = static_cast<double>(r.malformed.size()) / static_cast<double>(total);
  if (share <= opt.max_malformed_share) return;
  std::ostringstream msg;
  msg << path << ": " << r.malformed.size() << " of " << total << " rows malformed (limit "
      << opt.max_malformed_share * 100 << "%)";
  for (const auto& m : r.malformed) msg << "\n  line " << m.line << ": " << m.reason;
  throw DataError(msg.str());
}

}  // namespace

VisitRecord visit_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("row is not a JSON object");
  std::array<std::string, 7> f;
  for (std::size_t i = 0; i < kColumns.size(); ++i) f[i] = field_as_string(j, kColumns[i]);
  return build_visit(f);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  out.push_back(std::move(cur));
  return out;
}

IngestResult ingest_visits(const std::string& path, VisitFormat format,
                           const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read visit log: " + path);

  IngestResult result;
  std::string line;
  std::size_t lineno = 0;

  if (format == VisitFormat::jsonl) {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        result.visits.push_back(visit_from_json(j));
      } catch (const nlohmann::json::exception& e) {
        result.malformed.push_back({lineno, std::string("invalid JSON: ") + e.what()});
      } catch (const DataError& e) {
        result.malformed.push_back({lineno, e.what()});
      }
    }
    check_malformed_share(result, path, options);
    return result;
  }

  std::array<std::size_t, 7> index{};
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (trim(line).empty()) continue;
      const auto cols = split_csv_line(line);
      std::map<std::string, std::size_t> pos;
      for (std::size_t i = 0; i < cols.size(); ++i) pos[trim(cols[i])] = i;
      for (std::size_t k = 0; k < kColumns.size(); ++k) {
        const auto it = pos.find(std::string(kColumns[k]));
        if (it == pos.end())
          throw DataError(path + ": header is missing column '" + std::string(kColumns[k]) + "'");
        index[k] = it->second;
      }
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    try {
      const auto cols = split_csv_line(line);
      std::array<std::string, 7> f;
      for (std::size_t k = 0; k < kColumns.size(); ++k) {
        if (index[k] >= cols.size())
          throw DataError("expected " + std::to_string(index[k] + 1) + " columns, got " +
                          std::to_string(cols.size()));
        f[k] = trim(cols[index[k]]);
      }
      result.visits.push_back(build_visit(f));
    } catch (const DataError& e) {
      result.malformed.push_back({lineno, e.what()});
    }
  }
  check_malformed_share(result, path, options);
  return result;
}

}  // namespace polurl::corpus
