#pragma once

#include <chrono>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "polurl/common.hpp"
#include "polurl/gateway/backend.hpp"

namespace polurl::gateway {

struct CompletionRecord {
  std::string request_digest;
  std::string raw_response;
  double latency_ms = 0.0;
  int attempts = 1;
  UtcInstant created_at{};
};

nlohmann::json to_json(const CompletionRecord& r);
CompletionRecord completion_from_json(const nlohmann::json& j);

// sha256 over (backend_id, model_name, prompt, temperature).
std::string request_digest(const BackendConfig& c, const std::string& prompt);

// Append-only JSONL store with an in-memory index. Without a path the cache
// lives in memory only. Safe for concurrent use.
class CompletionCache {
 public:
  CompletionCache() = default;
  // Loads existing records; the first record wins for duplicate digests.
  explicit CompletionCache(std::string path);

  std::optional<CompletionRecord> find(const std::string& digest) const;
  // Ignores records whose digest is already present.
  void put(const CompletionRecord& r);
  std::size_t size() const;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, CompletionRecord> index_;
  std::ofstream out_;
};

// Reserves evenly spaced slots at `rate` per second, so at most one request
// exceeds the rate in any window. A rate of 0 disables limiting.
class RateLimiter {
 public:
  explicit RateLimiter(double rate);
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration interval_{};
  std::chrono::steady_clock::time_point next_{};
};

}  // namespace polurl::gateway
