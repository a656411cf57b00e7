#include "polurl/urlkit/url.hpp"

#include <algorithm>
#include <array>
#include <charconv>

#include "polurl/common.hpp"
#include "polurl/urlkit/public_suffix.hpp"

namespace polurl::urlkit {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_hex(char c) { return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }
bool is_high(char c) { return static_cast<unsigned char>(c) >= 0x80; }

int hex_value(char c) {
  if (is_digit(c)) return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return c - 'A' + 10;
}

// Malformed escapes are kept literally.
std::string percent_decode(std::string_view s, bool plus_is_space) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && is_hex(s[i + 1]) && is_hex(s[i + 2])) {
      out.push_back(static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2])));
      i += 2;
    } else if (plus_is_space && s[i] == '+') {
      out.push_back(' ');
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char c : s) {
    if (is_alpha(c) || is_digit(c) || c == '-' || c == '.' || c == '_' || c == '~') {
      out.push_back(c);
    } else {
      const auto b = static_cast<unsigned char>(c);
      out.push_back('%');
      out.push_back(kHex[b >> 4]);
      out.push_back(kHex[b & 0xf]);
    }
  }
  return out;
}

bool is_tracking_key(std::string_view key) {
  const std::string k = to_lower_ascii(key);
  return k.rfind("utm_", 0) == 0 || k == "fbclid" || k == "gclid";
}

bool valid_host_char(char c) {
  if (is_high(c)) return true;  // IDN pass-through
  return is_alpha(c) || is_digit(c) || c == '-' || c == '.' || c == '_';
}

}  // namespace

CanonicalUrl canonicalize(std::string_view input) {
  const std::string url = trim(input);
  if (url.empty()) throw UrlError("scheme", "empty URL");

  const auto colon = url.find(':');
  if (colon == std::string::npos || colon == 0) throw UrlError("scheme", "missing scheme");
  if (!is_alpha(url[0])) throw UrlError("scheme", "scheme must start with a letter");
  for (std::size_t i = 1; i < colon; ++i) {
    const char c = url[i];
    if (!(is_alpha(c) || is_digit(c) || c == '+' || c == '-' || c == '.'))
      throw UrlError("scheme", "invalid character in scheme");
  }
  CanonicalUrl out;
  out.scheme = to_lower_ascii(std::string_view(url).substr(0, colon));
  if (url.compare(colon + 1, 2, "//") != 0)
    throw UrlError("authority", "absolute URL requires '//' after the scheme");

  std::size_t pos = colon + 3;
  const std::size_t auth_end = url.find_first_of("/?#", pos);
  std::string_view authority =
      std::string_view(url).substr(pos, (auth_end == std::string::npos ? url.size() : auth_end) - pos);
  if (const auto at = authority.rfind('@'); at != std::string_view::npos)
    authority.remove_prefix(at + 1);

  std::string_view host_part = authority;
  std::string_view port_part;
  if (!authority.empty() && authority.front() == '[') {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) throw UrlError("host", "unterminated IPv6 literal");
    host_part = authority.substr(0, close + 1);
    if (close + 1 < authority.size()) {
      if (authority[close + 1] != ':') throw UrlError("port", "junk after IPv6 literal");
      port_part = authority.substr(close + 2);
    }
  } else if (const auto pc = authority.rfind(':'); pc != std::string_view::npos) {
    host_part = authority.substr(0, pc);
    port_part = authority.substr(pc + 1);
  }
  std::string host = to_lower_ascii(host_part);
  while (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty()) throw UrlError("host", "empty host");
  if (host.front() != '[') {
    for (char c : host) {
      if (!valid_host_char(c)) throw UrlError("host", "invalid character in host");
    }
    if (host.front() == '.' || host.find("..") != std::string::npos)
      throw UrlError("host", "empty label in host");
  }
  out.host = host;

  if (!port_part.empty()) {
    int port = 0;
    auto [p, ec] = std::from_chars(port_part.data(), port_part.data() + port_part.size(), port);
    if (ec != std::errc{} || p != port_part.data() + port_part.size() || port <= 0 || port > 65535)
      throw UrlError("port", "invalid port");
    const bool is_default =
        (out.scheme == "http" && port == 80) || (out.scheme == "https" && port == 443);
    if (!is_default) out.port = port;
  }

  if (host.front() == '[' || std::all_of(host.begin(), host.end(),
                                         [](char c) { return is_digit(c) || c == '.'; })) {
    out.registered_domain = host;
  } else {
    out.registered_domain = PublicSuffixList::bundled().registered_domain(host);
    if (out.registered_domain.empty()) out.registered_domain = host;
  }

  if (auth_end == std::string::npos) return out;
  pos = auth_end;
  const std::size_t path_end = url.find_first_of("?#", pos);
  const std::string_view raw_path = std::string_view(url).substr(
      pos, (path_end == std::string::npos ? url.size() : path_end) - pos);

  // Dot segments are resolved on the raw path, before decoding, so that an
  // encoded "%2E" survives as a literal segment.
  std::vector<std::string> segments;
  for (const auto& raw : split(raw_path, '/')) {
    if (raw.empty() || raw == ".") continue;
    if (raw == "..") {
      if (!segments.empty()) segments.pop_back();
      continue;
    }
    segments.push_back(to_lower_ascii(percent_decode(raw, false)));
  }
  out.path_segments = std::move(segments);

  if (path_end != std::string::npos && url[path_end] == '?') {
    const std::size_t q_end = url.find('#', path_end);
    const std::string_view query = std::string_view(url).substr(
        path_end + 1, (q_end == std::string::npos ? url.size() : q_end) - path_end - 1);
    for (const auto& pair : split(query, '&')) {
      if (pair.empty()) continue;
      const auto eq = pair.find('=');
      std::string key = percent_decode(std::string_view(pair).substr(0, eq), true);
      std::string value =
          eq == std::string::npos ? std::string() : percent_decode(pair.substr(eq + 1), true);
      if (key.empty() || is_tracking_key(key)) continue;
      out.query_pairs.emplace_back(std::move(key), std::move(value));
    }
  }
  return out;
}

std::string to_string(const CanonicalUrl& url) {
  std::string s = url.scheme + "://" + url.host;
  if (url.port) s += ":" + std::to_string(*url.port);
  s += "/";
  for (std::size_t i = 0; i < url.path_segments.size(); ++i) {
    if (i) s += "/";
    const auto& seg = url.path_segments[i];
    if (seg == "." || seg == "..") {
      for (std::size_t k = 0; k < seg.size(); ++k) s += "%2E";
    } else {
      s += percent_encode(seg);
    }
  }
  if (!url.query_pairs.empty()) {
    s += "?";
    for (std::size_t i = 0; i < url.query_pairs.size(); ++i) {
      if (i) s += "&";
      s += percent_encode(url.query_pairs[i].first);
      s += "=";
      s += percent_encode(url.query_pairs[i].second);
    }
  }
  return s;
}

std::string path_string(const CanonicalUrl& url) {
  if (url.path_segments.empty()) return "/";
  std::string s;
  for (const auto& seg : url.path_segments) s += "/" + seg;
  return s;
}

namespace {

constexpr std::array<std::string_view, 8> kFileExtensions = {"html", "htm",  "shtml", "php",
                                                             "asp",  "aspx", "jsp",   "cms"};

bool chunk_is_id_like(std::string_view chunk) {
  if (chunk.empty()) return false;
  int digits = 0;
  bool all_hex = true;
  bool all_alnum = true;
  for (char c : chunk) {
    if (is_digit(c)) ++digits;
    if (!is_hex(c)) all_hex = false;
    if (!(is_alpha(c) || is_digit(c))) all_alnum = false;
  }
  if (digits == static_cast<int>(chunk.size())) return true;
  if (chunk.size() >= 8 && all_hex) return true;
  if (chunk.size() >= 10 && all_alnum && digits >= 3) return true;
  return false;
}

void push_token(UrlTokens& out, std::string token, bool id_like) {
  out.tokens.push_back(std::move(token));
  out.id_like.push_back(id_like);
  if (id_like) {
    ++out.id_like_count;
  } else {
    ++out.alpha_token_count;
  }
}

}  // namespace

UrlTokens tokenize_path(const CanonicalUrl& url) {
  UrlTokens out;
  for (std::size_t s = 0; s < url.path_segments.size(); ++s) {
    std::string_view seg = url.path_segments[s];
    if (s + 1 == url.path_segments.size()) {
      if (const auto dot = seg.rfind('.'); dot != std::string_view::npos) {
        const auto ext = seg.substr(dot + 1);
        if (std::find(kFileExtensions.begin(), kFileExtensions.end(), ext) != kFileExtensions.end())
          seg = seg.substr(0, dot);
      }
    }
    // Chunks: maximal runs of letters, digits and non-ASCII bytes.
    std::size_t i = 0;
    while (i < seg.size()) {
      while (i < seg.size() && !(is_alpha(seg[i]) || is_digit(seg[i]) || is_high(seg[i]))) ++i;
      std::size_t j = i;
      while (j < seg.size() && (is_alpha(seg[j]) || is_digit(seg[j]) || is_high(seg[j]))) ++j;
      if (j == i) break;
      const std::string_view chunk = seg.substr(i, j - i);
      if (chunk_is_id_like(chunk)) {
        push_token(out, to_lower_ascii(chunk), true);
      } else {
        std::size_t a = 0;
        while (a < chunk.size()) {
          const bool digit_run = is_digit(chunk[a]);
          std::size_t b = a;
          while (b < chunk.size() && is_digit(chunk[b]) == digit_run) ++b;
          push_token(out, to_lower_ascii(chunk.substr(a, b - a)), digit_run);
          a = b;
        }
      }
      i = j;
    }
  }
  return out;
}

std::string_view to_string(SkipReason r) {
  switch (r) {
    case SkipReason::empty_path: return "empty_path";
    case SkipReason::encoded_path: return "encoded_path";
    case SkipReason::no_linguistic_cues: return "no_linguistic_cues";
    case SkipReason::descriptive: return "descriptive";
  }
  return "?";
}

DescriptivenessVerdict assess_descriptiveness(const UrlTokens& tokens, int cue_threshold) {
  DescriptivenessVerdict v;
  const auto total = tokens.tokens.size();
  v.score = static_cast<double>(tokens.alpha_token_count) /
            static_cast<double>(std::max<std::size_t>(1, total));
  if (total == 0) {
    v.reason = SkipReason::empty_path;
  } else if (tokens.id_like_count == static_cast<int>(total)) {
    v.reason = SkipReason::encoded_path;
  } else {
    int cues = 0;
    for (std::size_t i = 0; i < total; ++i) {
      if (!tokens.id_like[i] && tokens.tokens[i].size() >= kMinCueLength) ++cues;
    }
    v.reason = cues < cue_threshold ? SkipReason::no_linguistic_cues : SkipReason::descriptive;
  }
  v.skip_eligible = v.reason != SkipReason::descriptive;
  return v;
}

}  // namespace polurl::urlkit
