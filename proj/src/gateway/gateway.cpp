#include "polurl/gateway/gateway.hpp"

#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "polurl/gateway/lexicon.hpp"

namespace polurl::gateway {

namespace {

std::string cache_path(const std::string& root, const std::string& backend_id) {
  if (root.empty()) return {};
  return (std::filesystem::path(root) / backend_id / "completions.jsonl").string();
}

CompletionCache open_cache(const std::string& root, const std::string& backend_id) {
  if (root.empty()) return CompletionCache();
  return CompletionCache(cache_path(root, backend_id));
}

std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint_url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

Gateway::Gateway(BackendConfig config, const std::string& cache_root)
    : config_(std::move(config)),
      cache_(open_cache(cache_root, config_.backend_id)),
      limiter_(config_.rate_limit) {
  validate(config_);
}

nlohmann::json chat_request_body(const BackendConfig& c, const std::string& prompt) {
  return {{"model", c.model_name},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
          {"temperature", c.temperature},
          {"max_tokens", c.max_output_tokens}};
}

std::optional<std::string> chat_response_text(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message")) return std::nullopt;
  const auto& msg = first["message"];
  if (!msg.is_object() || !msg.contains("content") || !msg["content"].is_string())
    return std::nullopt;
  return msg["content"].get<std::string>();
}

std::string Gateway::call_http(const std::string& prompt, int* attempts) {
  const auto [origin, path] = split_endpoint(*config_.endpoint_url);
  const std::string body = chat_request_body(config_, prompt).dump();
  httplib::Headers headers;
  if (config_.api_key) headers.emplace("Authorization", "Bearer " + *config_.api_key);
  std::vector<std::string> log;
  for (int attempt = 1; attempt <= config_.max_retries + 1; ++attempt) {
    *attempts = attempt;
    if (attempt > 1) std::this_thread::sleep_for(config_.retry_backoff * (1 << std::min(attempt - 2, 16)));
    limiter_.acquire();
    httplib::Client client(origin);
    client.set_connection_timeout(config_.request_timeout);
    client.set_read_timeout(config_.request_timeout);
    client.set_write_timeout(config_.request_timeout);
    ++network_calls_;
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      log.push_back("attempt " + std::to_string(attempt) + ": " + httplib::to_string(res.error()));
      continue;
    }
    if (res->status == 200) {
      auto text = chat_response_text(res->body);
      if (!text) {
        log.push_back("attempt " + std::to_string(attempt) + ": unexpected response envelope");
        throw BackendError(config_.backend_id + ": unexpected response envelope", std::move(log));
      }
      return *text;
    }
    log.push_back("attempt " + std::to_string(attempt) + ": HTTP " + std::to_string(res->status));
    if (!retryable(res->status))
      throw BackendError(config_.backend_id + ": HTTP " + std::to_string(res->status),
                         std::move(log));
  }
  throw BackendError(config_.backend_id + ": retries exhausted after " +
                         std::to_string(config_.max_retries + 1) + " attempts",
                     std::move(log));
}

Completion Gateway::complete(const std::string& prompt) {
  const std::string digest = request_digest(config_, prompt);
  if (auto hit = cache_.find(digest)) {
    ++cache_hits_;
    return {hit->raw_response, hit->attempts, true};
  }
  CompletionRecord rec;
  rec.request_digest = digest;
  const auto start = std::chrono::steady_clock::now();
  if (config_.kind == BackendKind::mock_lexicon) {
    const auto view = prompt::inspect_rendered_prompt(prompt);
    if (!view) throw BackendError(config_.backend_id + ": mock cannot read the prompt", {});
    rec.raw_response = lexicon_classify(view->payload, view->mode, view->allows_skip);
    rec.attempts = 1;
  } else {
    rec.raw_response = call_http(prompt, &rec.attempts);
  }
  rec.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  rec.created_at = utc_now();
  cache_.put(rec);
  return {rec.raw_response, rec.attempts, false};
}

nlohmann::json to_json(const Prediction& p) {
  nlohmann::json j = {{"item_id", p.item_id},
                      {"backend_id", p.backend_id},
                      {"mode", short_name(p.mode)},
                      {"template_id", p.template_id},
                      {"attempts", p.attempts}};
  if (p.answer) {
    j["verdict"] = prompt::to_string(p.answer->verdict);
    j["position"] = p.answer->political_position ? nlohmann::json(*p.answer->political_position)
                                                 : nlohmann::json(nullptr);
    j["raw_digest"] = p.answer->raw_digest;
  } else {
    j["verdict"] = "unparseable";
    j["position"] = nullptr;
    j["raw_digest"] = nullptr;
  }
  return j;
}

Prediction prediction_from_json(const nlohmann::json& j) {
  try {
    Prediction p;
    p.item_id = j.at("item_id").get<std::string>();
    p.backend_id = j.at("backend_id").get<std::string>();
    const auto mode = parse_mode(j.at("mode").get<std::string>());
    if (!mode) throw DataError("prediction " + p.item_id + ": bad mode");
    p.mode = *mode;
    p.template_id = j.value("template_id", std::string());
    p.attempts = j.value("attempts", 0);
    const auto verdict = j.at("verdict").get<std::string>();
    if (verdict != "unparseable") {
      const auto v = prompt::parse_verdict(verdict);
      if (!v) throw DataError("prediction " + p.item_id + ": bad verdict " + verdict);
      prompt::ModelAnswer a;
      a.verdict = *v;
      if (j.contains("position") && !j.at("position").is_null())
        a.political_position = j.at("position").get<int>();
      if ((a.verdict == prompt::Verdict::yes) != a.political_position.has_value())
        throw DataError("prediction " + p.item_id + ": position must be set iff verdict is Yes");
      if (a.political_position && (*a.political_position < 1 || *a.political_position > 10))
        throw DataError("prediction " + p.item_id + ": position outside 1..10");
      a.raw_digest = j.value("raw_digest", std::string());
      p.answer = std::move(a);
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("prediction record: ") + e.what());
  }
}

Prediction classify_item(const corpus::ArticleRecord& item, Mode mode,
                         const prompt::PromptTemplate& tmpl, Gateway& gw,
                         const ClassifyOptions& options, prompt::ParseCounters* counters) {
  std::string payload;
  if (mode == Mode::full_text) {
    if (item.fetch_status != corpus::FetchStatus::ok || !item.body_text)
      throw DataError("item " + item.item_id + ": full_text mode needs a fetched article, status is " +
                      std::string(corpus::to_string(item.fetch_status)));
    payload = *item.body_text;
  } else {
    payload = item.url;
  }
  const auto request =
      prompt::make_request(item.item_id, mode, std::move(payload), item.country,
                           options.truncation_chars);
  const std::string base = prompt::render_prompt(tmpl, request);

  Prediction p;
  p.item_id = item.item_id;
  p.backend_id = gw.config().backend_id;
  p.mode = mode;
  p.template_id = tmpl.template_id;
  std::string prompt_text = base;
  for (int attempt = 0; attempt <= gw.config().max_retries; ++attempt) {
    if (attempt > 0) prompt_text += kJsonReminder;
    Completion c;
    try {
      c = gw.complete(prompt_text);
    } catch (const BackendError& e) {
      throw BackendError("item " + item.item_id + ": " + e.what(), e.attempt_log());
    }
    ++p.attempts;
    auto parsed = prompt::parse_response(c.raw_response, tmpl.allows_skip, counters);
    if (auto* ans = std::get_if<prompt::ModelAnswer>(&parsed)) {
      p.answer = std::move(*ans);
      return p;
    }
  }
  return p;
}

BatchResult classify_all(const std::vector<corpus::ArticleRecord>& items, Mode mode,
                         const prompt::PromptTemplate& tmpl, Gateway& gw,
                         const ClassifyOptions& options) {
  BatchResult result;
  result.predictions.resize(items.size());
  std::vector<prompt::ParseCounters> counters(items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    while (!stop) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        result.predictions[i] = classify_item(items[i], mode, tmpl, gw, options, &counters[i]);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(options.workers, items.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  for (const auto& c : counters) result.counters += c;
  return result;
}

}  // namespace polurl::gateway
