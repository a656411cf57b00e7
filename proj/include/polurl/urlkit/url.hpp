#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace polurl::urlkit {

class UrlError : public std::invalid_argument {
 public:
  UrlError(std::string component, const std::string& message)
      : std::invalid_argument(component + ": " + message), component_(std::move(component)) {}
  // Which part of the URL was rejected: "scheme", "authority", "host", "port", "path", "query".
  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

struct CanonicalUrl {
  std::string scheme;
  std::string host;
  std::optional<int> port;  // only when not the scheme default
  std::string registered_domain;
  std::vector<std::string> path_segments;
  std::vector<std::pair<std::string, std::string>> query_pairs;

  bool operator==(const CanonicalUrl&) const = default;
};

// Lowercases scheme, host and path, decodes percent escapes once, drops the
// fragment, empty segments and tracking parameters (utm_*, fbclid, gclid).
CanonicalUrl canonicalize(std::string_view url);

// Serializes back to an absolute URL; canonicalize(to_string(c)) == c.
std::string to_string(const CanonicalUrl& url);

// "/a/b" form of the decoded path (not re-encoded), "/" for the root.
std::string path_string(const CanonicalUrl& url);

struct UrlTokens {
  std::vector<std::string> tokens;
  std::vector<bool> id_like;  // parallel to tokens
  int id_like_count = 0;
  int alpha_token_count = 0;

  bool operator==(const UrlTokens&) const = default;
};

// Splits path segments on separators and letter/digit boundaries. Chunks that
// look like identifiers (all digits, hex of 8+ chars, or 10+ alphanumerics
// with 3+ digits) are kept whole and counted as id-like.
UrlTokens tokenize_path(const CanonicalUrl& url);

enum class SkipReason { empty_path, encoded_path, no_linguistic_cues, descriptive };
std::string_view to_string(SkipReason r);

struct DescriptivenessVerdict {
  double score = 0.0;
  bool skip_eligible = true;
  SkipReason reason = SkipReason::empty_path;
};

inline constexpr int kDefaultCueThreshold = 3;
inline constexpr std::size_t kMinCueLength = 3;

// A path is descriptive when it carries at least `cue_threshold` alphabetic
// tokens of length >= 3. score = alpha tokens / total tokens.
DescriptivenessVerdict assess_descriptiveness(const UrlTokens& tokens,
                                              int cue_threshold = kDefaultCueThreshold);

}  // namespace polurl::urlkit
