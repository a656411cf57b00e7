#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polurl/corpus/dataset.hpp"
#include "polurl/gateway/backend.hpp"
#include "polurl/gateway/cache.hpp"
#include "polurl/prompt/response.hpp"
#include "polurl/prompt/template.hpp"

namespace polurl::gateway {

struct Completion {
  std::string raw_response;
  int attempts = 0;
  bool from_cache = false;
};

// One backend plus its cache and rate limiter, shared by all workers.
class Gateway {
 public:
  // `cache_root` empty keeps the cache in memory; otherwise records go to
  // <cache_root>/<backend_id>/completions.jsonl.
  explicit Gateway(BackendConfig config, const std::string& cache_root = {});

  // Cache first, then the backend. http_chat retries timeouts, network
  // errors, 429 and 5xx with exponential backoff; throws BackendError.
  Completion complete(const std::string& prompt);

  const BackendConfig& config() const { return config_; }
  std::size_t network_calls() const { return network_calls_; }
  std::size_t cache_hits() const { return cache_hits_; }

 private:
  std::string call_http(const std::string& prompt, int* attempts);

  BackendConfig config_;
  CompletionCache cache_;
  RateLimiter limiter_;
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

// Chat-completion request body: {model, messages:[{role:user}], temperature, max_tokens}.
nlohmann::json chat_request_body(const BackendConfig& c, const std::string& prompt);
// choices[0].message.content; nullopt when the envelope is not of that shape.
std::optional<std::string> chat_response_text(const std::string& body);

inline constexpr std::string_view kJsonReminder = "\nReturn ONLY valid JSON.";

struct Prediction {
  std::string item_id;
  std::string backend_id;
  Mode mode = Mode::full_text;
  std::string template_id;
  std::optional<prompt::ModelAnswer> answer;  // nullopt: unparseable after retries
  int attempts = 0;                           // completions requested

  bool unparseable() const { return !answer.has_value(); }
};

nlohmann::json to_json(const Prediction& p);
Prediction prediction_from_json(const nlohmann::json& j);

struct ClassifyOptions {
  std::size_t truncation_chars = prompt::kDefaultTruncationChars;
  std::size_t workers = 8;
};

// render -> complete -> parse; a parse failure re-requests with the JSON
// reminder appended, up to max_retries times. Full-text mode needs a fetched
// item (DataError otherwise). BackendError is rethrown with the item id.
Prediction classify_item(const corpus::ArticleRecord& item, Mode mode,
                         const prompt::PromptTemplate& tmpl, Gateway& gw,
                         const ClassifyOptions& options = {},
                         prompt::ParseCounters* counters = nullptr);

struct BatchResult {
  std::vector<Prediction> predictions;  // same order as the input items
  prompt::ParseCounters counters;
};

// Runs classify_item over a bounded worker pool. The first BackendError
// stops the batch and is rethrown.
BatchResult classify_all(const std::vector<corpus::ArticleRecord>& items, Mode mode,
                         const prompt::PromptTemplate& tmpl, Gateway& gw,
                         const ClassifyOptions& options = {});

}  // namespace polurl::gateway
