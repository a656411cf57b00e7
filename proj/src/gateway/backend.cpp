#include "polurl/gateway/backend.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "polurl/common.hpp"

namespace polurl::gateway {

std::string_view to_string(BackendKind k) {
  return k == BackendKind::http_chat ? "http_chat" : "mock_lexicon";
}

std::optional<BackendKind> parse_backend_kind(std::string_view s) {
  if (s == "http_chat") return BackendKind::http_chat;
  if (s == "mock_lexicon") return BackendKind::mock_lexicon;
  return std::nullopt;
}

void validate(const BackendConfig& c) {
  const std::string where = "backend " + c.backend_id + ": ";
  if (c.backend_id.empty()) throw ConfigError("backend id is empty");
  if (c.kind == BackendKind::http_chat && (!c.endpoint_url || c.endpoint_url->empty()))
    throw ConfigError(where + "http_chat requires endpoint_url");
  if (c.kind == BackendKind::mock_lexicon && c.endpoint_url)
    throw ConfigError(where + "mock_lexicon takes no endpoint_url");
  if (!(c.temperature >= 0) || !std::isfinite(c.temperature))
    throw ConfigError(where + "temperature must be >= 0");
  if (c.max_output_tokens <= 0) throw ConfigError(where + "max_output_tokens must be positive");
  if (c.request_timeout.count() <= 0) throw ConfigError(where + "request_timeout must be positive");
  if (c.max_retries < 0) throw ConfigError(where + "max_retries must be >= 0");
  if (!(c.rate_limit >= 0) || !std::isfinite(c.rate_limit))
    throw ConfigError(where + "rate_limit must be >= 0");
  if (c.retry_backoff.count() < 0) throw ConfigError(where + "retry_backoff_ms must be >= 0");
}

std::string api_key_env_var(const std::string& backend_id) {
  std::string out = "POLURL_API_KEY_";
  for (unsigned char ch : backend_id)
    out.push_back(std::isalnum(ch) ? static_cast<char>(std::toupper(ch)) : '_');
  return out;
}

namespace {

double to_double(const std::string& where, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where + ": not a number: '" + v + "'");
  }
}

long to_long(const std::string& where, const std::string& v) {
  try {
    std::size_t used = 0;
    const long d = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where + ": not an integer: '" + v + "'");
  }
}

}  // namespace

BackendConfig backend_from_section(const std::string& backend_id,
                                   const std::map<std::string, std::string>& kv) {
  BackendConfig c;
  c.backend_id = backend_id;
  c.model_name = backend_id;
  const std::string sec = "[backend." + backend_id + "]";
  for (const auto& [key, raw] : kv) {
    const std::string v = trim(raw);
    const std::string where = sec + " " + key;
    if (key == "kind") {
      const auto k = parse_backend_kind(v);
      if (!k) throw ConfigError(where + ": unknown kind '" + v + "'");
      c.kind = *k;
    } else if (key == "endpoint_url") {
      if (!v.empty()) c.endpoint_url = v;
    } else if (key == "model_name") {
      c.model_name = v;
    } else if (key == "temperature") {
      c.temperature = to_double(where, v);
    } else if (key == "max_output_tokens") {
      c.max_output_tokens = static_cast<int>(to_long(where, v));
    } else if (key == "request_timeout_ms") {
      c.request_timeout = std::chrono::milliseconds(to_long(where, v));
    } else if (key == "max_retries") {
      c.max_retries = static_cast<int>(to_long(where, v));
    } else if (key == "rate_limit") {
      c.rate_limit = to_double(where, v);
    } else if (key == "retry_backoff_ms") {
      c.retry_backoff = std::chrono::milliseconds(to_long(where, v));
    } else if (key == "api_key") {
      if (!v.empty()) c.api_key = v;
    } else if (key == "text_template") {
      c.text_template = v;
    } else if (key == "url_template") {
      c.url_template = v;
    } else {
      throw ConfigError(where + ": unknown key");
    }
  }
  if (const char* env = std::getenv(api_key_env_var(backend_id).c_str()); env && *env)
    c.api_key = env;
  validate(c);
  return c;
}

BackendError::BackendError(const std::string& msg, std::vector<std::string> attempt_log)
    : std::runtime_error(msg), log_(std::move(attempt_log)) {}

}  // namespace polurl::gateway
