#include "polurl/corpus/fetch.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "polurl/corpus/extract.hpp"
#include "polurl/urlkit/url.hpp"

namespace polurl::corpus {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string target;  // path + query, at least "/"
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw urlkit::UrlError("scheme", "missing scheme");
  const auto path_start = url.find_first_of("/?#", scheme_end + 3);
  SplitUrl s;
  s.origin = url.substr(0, path_start);
  std::string target = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (const auto hash = target.find('#'); hash != std::string::npos) target.resize(hash);
  if (target.empty() || target[0] == '?') target.insert(0, "/");
  s.target = target;
  return s;
}

bool is_html(const std::string& content_type, const std::string& body) {
  const std::string ct = to_lower_ascii(content_type);
  if (ct.find("text/html") != std::string::npos || ct.find("application/xhtml") != std::string::npos)
    return true;
  if (!ct.empty()) return false;
  const std::string head = to_lower_ascii(std::string_view(body).substr(0, 512));
  return head.find("<html") != std::string::npos || head.find("<!doctype html") != std::string::npos;
}

std::string host_key(const std::string& url) {
  try {
    return urlkit::canonicalize(url).host;
  } catch (const urlkit::UrlError&) {
    return url;
  }
}

}  // namespace

HttpPageSource::HttpPageSource(std::string user_agent) : user_agent_(std::move(user_agent)) {}

PageResponse HttpPageSource::get(const std::string& url, std::chrono::milliseconds timeout) {
  PageResponse r;
  SplitUrl parts;
  try {
    parts = split_url(url);
  } catch (const urlkit::UrlError&) {
    r.transport_error = true;
    return r;
  }
  httplib::Client client(parts.origin);
  client.set_follow_location(false);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const httplib::Headers headers = {{"User-Agent", user_agent_}};
  auto res = client.Get(parts.target, headers);
  if (!res) {
    r.transport_error = true;
    return r;
  }
  r.status = res->status;
  r.content_type = res->get_header_value("Content-Type");
  r.location = res->get_header_value("Location");
  r.body = std::move(res->body);
  return r;
}

SnapshotPageSource::SnapshotPageSource(const std::string& path) {
  for (const auto& row : read_jsonl(path)) {
    if (!row.is_object() || !row.contains("url") || !row.at("url").is_string())
      throw DataError(path + ": snapshot row without a string \"url\"");
    PageResponse r;
    r.status = row.value("status", 200);
    r.content_type = row.value("content_type", std::string("text/html; charset=utf-8"));
    r.location = row.value("location", std::string());
    r.body = row.value("body", std::string());
    r.transport_error = row.value("transport_error", false);
    if (row.contains("captured_at")) {
      r.captured_at = parse_rfc3339(row.at("captured_at").get<std::string>());
      if (!r.captured_at) throw DataError(path + ": captured_at is not RFC 3339");
    }
    pages_[row.at("url").get<std::string>()] = std::move(r);
  }
}

PageResponse SnapshotPageSource::get(const std::string& url, std::chrono::milliseconds) {
  if (const auto it = pages_.find(url); it != pages_.end()) return it->second;
  PageResponse r;
  r.status = 404;
  r.content_type = "text/html";
  return r;
}

std::string resolve_location(const std::string& base, const std::string& location) {
  if (location.find("://") != std::string::npos) return location;
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) return location;
  if (location.rfind("//", 0) == 0) return base.substr(0, scheme_end + 1) + location;
  const auto path_start = base.find_first_of("/?#", scheme_end + 3);
  const std::string origin = base.substr(0, path_start);
  if (!location.empty() && location[0] == '/') return origin + location;
  std::string dir = path_start == std::string::npos ? "/" : base.substr(path_start);
  if (const auto q = dir.find_first_of("?#"); q != std::string::npos) dir.resize(q);
  dir.resize(dir.rfind('/') + 1);
  return origin + dir + location;
}

ArticleRecord fetch_article(PageSource& source, const std::string& url,
                            const FetchOptions& options) {
  ArticleRecord a;
  a.url = url;
  std::string current = url;
  int redirects = 0;
  const auto failed = [&] {
    return redirects > 0 ? FetchStatus::moved : FetchStatus::inaccessible;
  };
  while (true) {
    const PageResponse resp = source.get(current, options.timeout);
    a.fetched_at = resp.captured_at.value_or(utc_now());
    if (resp.transport_error) {
      a.fetch_status = failed();
      return a;
    }
    if (resp.status >= 300 && resp.status < 400 && !resp.location.empty()) {
      if (redirects >= options.max_redirects) {
        a.fetch_status = FetchStatus::moved;
        return a;
      }
      current = resolve_location(current, resp.location);
      ++redirects;
      continue;
    }
    if (resp.status < 200 || resp.status >= 300) {
      a.fetch_status = failed();
      return a;
    }
    if (!is_html(resp.content_type, resp.body)) {
      a.fetch_status = FetchStatus::inaccessible;
      return a;
    }
    auto text = extract_main_text(resp.body);
    if (!text) {
      a.fetch_status = FetchStatus::inaccessible;
      return a;
    }
    a.fetch_status = FetchStatus::ok;
    a.title = extract_title(resp.body);
    a.body_text = std::move(text);
    return a;
  }
}

std::vector<ArticleRecord> fetch_all(PageSource& source, const std::vector<ArticleRecord>& items,
                                     const FetchOptions& options) {
  std::vector<ArticleRecord> out(items.size());
  std::map<std::string, std::unique_ptr<std::mutex>> host_locks;
  std::vector<std::mutex*> item_lock(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& slot = host_locks[host_key(items[i].url)];
    if (!slot) slot = std::make_unique<std::mutex>();
    item_lock[i] = slot.get();
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      std::lock_guard<std::mutex> host_guard(*item_lock[i]);
      ArticleRecord r = fetch_article(source, items[i].url, options);
      r.item_id = items[i].item_id;
      r.country = items[i].country;
      out[i] = std::move(r);
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(options.workers, items.size()));
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  pool.clear();
  return out;
}

}  // namespace polurl::corpus
