#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polurl::gateway {

enum class BackendKind { http_chat, mock_lexicon };
std::string_view to_string(BackendKind k);
std::optional<BackendKind> parse_backend_kind(std::string_view s);

struct BackendConfig {
  std::string backend_id;
  BackendKind kind = BackendKind::mock_lexicon;
  std::optional<std::string> endpoint_url;  // required for http_chat
  std::string model_name;
  double temperature = 0.0;
  int max_output_tokens = 64;
  std::chrono::milliseconds request_timeout{60000};
  int max_retries = 3;
  double rate_limit = 0.0;  // requests per second, 0 = unlimited
  std::chrono::milliseconds retry_backoff{500};
  std::optional<std::string> api_key;
  // Per-backend prompt overrides; empty means the run default.
  std::string text_template;
  std::string url_template;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ConfigError when a field is out of range or endpoint_url does not
// match the kind.
void validate(const BackendConfig& c);

// Builds a config from the key/value pairs of a [backend.<id>] section and
// applies the POLURL_API_KEY_<ID> environment override.
BackendConfig backend_from_section(const std::string& backend_id,
                                   const std::map<std::string, std::string>& kv);

// POLURL_API_KEY_ + upper-cased id with non-alphanumerics mapped to '_'.
std::string api_key_env_var(const std::string& backend_id);

// Raised when a backend call fails for good; carries one line per attempt.
class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& msg, std::vector<std::string> attempt_log);
  const std::vector<std::string>& attempt_log() const { return log_; }

 private:
  std::vector<std::string> log_;
};

}  // namespace polurl::gateway
