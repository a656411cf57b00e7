#include "polurl/gateway/cache.hpp"

#include <filesystem>
#include <thread>

#include "polurl/corpus/dataset.hpp"
#include "polurl/hash.hpp"

namespace polurl::gateway {

nlohmann::json to_json(const CompletionRecord& r) {
  return {{"request_digest", r.request_digest},
          {"raw_response", r.raw_response},
          {"latency_ms", r.latency_ms},
          {"attempts", r.attempts},
          {"created_at", format_rfc3339(r.created_at)}};
}

CompletionRecord completion_from_json(const nlohmann::json& j) {
  CompletionRecord r;
  r.request_digest = j.at("request_digest").get<std::string>();
  r.raw_response = j.at("raw_response").get<std::string>();
  r.latency_ms = j.value("latency_ms", 0.0);
  r.attempts = j.value("attempts", 1);
  const auto t = parse_rfc3339(j.at("created_at").get<std::string>());
  if (!t) throw DataError("completion record: bad created_at");
  r.created_at = *t;
  return r;
}

std::string request_digest(const BackendConfig& c, const std::string& prompt) {
  const nlohmann::json key = {c.backend_id, c.model_name, prompt, c.temperature};
  return sha256_hex(key.dump());
}

CompletionCache::CompletionCache(std::string path) : path_(std::move(path)) {
  namespace fs = std::filesystem;
  const fs::path p(path_);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  if (fs::exists(p)) {
    try {
      for (const auto& row : corpus::read_jsonl(path_)) {
        auto r = completion_from_json(row);
        index_.try_emplace(r.request_digest, std::move(r));
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path_ + ": " + e.what());
    }
  }
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw DataError("cannot open cache " + path_);
}

std::optional<CompletionRecord> CompletionCache::find(const std::string& digest) const {
  std::shared_lock lock(mu_);
  const auto it = index_.find(digest);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void CompletionCache::put(const CompletionRecord& r) {
  std::unique_lock lock(mu_);
  if (!index_.try_emplace(r.request_digest, r).second) return;
  if (out_.is_open()) {
    out_ << to_json(r).dump() << '\n';
    out_.flush();
  }
}

std::size_t CompletionCache::size() const {
  std::shared_lock lock(mu_);
  return index_.size();
}

RateLimiter::RateLimiter(double rate) {
  if (rate > 0)
    interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / rate));
}

void RateLimiter::acquire() {
  if (interval_.count() == 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

}  // namespace polurl::gateway
