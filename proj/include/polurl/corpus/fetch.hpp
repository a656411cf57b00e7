#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "polurl/corpus/dataset.hpp"

namespace polurl::corpus {

// One HTTP exchange, without following redirects.
struct PageResponse {
  bool transport_error = false;  // DNS, connect, timeout, reset
  int status = 0;
  std::string content_type;
  std::string location;
  std::string body;
  std::optional<UtcInstant> captured_at;  // set by offline sources
};

class PageSource {
 public:
  virtual ~PageSource() = default;
  virtual PageResponse get(const std::string& url, std::chrono::milliseconds timeout) = 0;
};

// Live HTTP(S) via cpp-httplib.
class HttpPageSource : public PageSource {
 public:
  explicit HttpPageSource(std::string user_agent = "polurl-fetch/1.0");
  PageResponse get(const std::string& url, std::chrono::milliseconds timeout) override;

 private:
  std::string user_agent_;
};

// Offline snapshot: JSONL rows {url, status, content_type, body, location,
// captured_at}.
// URLs absent from the snapshot answer 404.
class SnapshotPageSource : public PageSource {
 public:
  explicit SnapshotPageSource(const std::string& path);
  PageResponse get(const std::string& url, std::chrono::milliseconds timeout) override;

 private:
  std::map<std::string, PageResponse> pages_;
};

struct FetchOptions {
  std::chrono::milliseconds timeout{15000};
  int max_redirects = 5;
  std::size_t workers = 8;
};

// Fetches one URL and classifies the outcome: ok (HTML with extractable main
// text), moved (a redirect chain that exceeds the limit or ends in failure),
// or inaccessible (4xx/5xx, timeout, non-HTML, no main text). Never throws
// for network conditions.
ArticleRecord fetch_article(PageSource& source, const std::string& url,
                            const FetchOptions& options = {});

// Fetches every item in parallel (bounded workers, one request at a time per
// host). Items keep their order; item_id and country are preserved.
std::vector<ArticleRecord> fetch_all(PageSource& source, const std::vector<ArticleRecord>& items,
                                     const FetchOptions& options = {});

// Resolves a Location header against the URL it came from.
std::string resolve_location(const std::string& base, const std::string& location);

}  // namespace polurl::corpus
