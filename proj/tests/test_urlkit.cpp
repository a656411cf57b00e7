#include <doctest.h>

#include <random>

#include "polurl/common.hpp"
#include "polurl/hash.hpp"
#include "polurl/urlkit/public_suffix.hpp"
#include "polurl/urlkit/url.hpp"

using namespace polurl;
using namespace polurl::urlkit;

TEST_CASE("canonicalize normalizes case, fragments, tracking params and default ports") {
  const auto c = canonicalize(
      "HTTPS://WWW.BBC.co.uk:443/News//World-Europe-60547473/?utm_source=x&b=2&fbclid=z#frag");
  CHECK(c.scheme == "https");
  CHECK(c.host == "www.bbc.co.uk");
  CHECK_FALSE(c.port.has_value());
  CHECK(c.registered_domain == "bbc.co.uk");
  CHECK(c.path_segments == std::vector<std::string>{"news", "world-europe-60547473"});
  REQUIRE(c.query_pairs.size() == 1);
  CHECK(c.query_pairs[0].first == "b");
  CHECK(path_string(c) == "/news/world-europe-60547473");
}

TEST_CASE("canonicalize keeps a non-default port and decodes percent escapes once") {
  const auto c = canonicalize("http://example.com:8080/a%20b/%2541");
  REQUIRE(c.port.has_value());
  CHECK(*c.port == 8080);
  CHECK(c.path_segments == std::vector<std::string>{"a b", "%41"});
}

TEST_CASE("canonicalize rejects broken URLs by component") {
  auto component_of = [](const char* url) {
    try {
      canonicalize(url);
    } catch (const UrlError& e) {
      return e.component();
    }
    return std::string("none");
  };
  CHECK(component_of("example.com/path") == "scheme");
  CHECK(component_of("1http://example.com/") == "scheme");
  CHECK(component_of("http:///path") != "none");
  CHECK(component_of("http://exa mple.com/") != "none");
  CHECK(component_of("http://example.com:99999/") == "port");
}

TEST_CASE("canonicalize round-trips through to_string") {
  const char* urls[] = {
      "https://www.lemonde.fr/politique/article/2022/03/01/macron-candidat_123.html",
      "http://example.com:8080/a%20b?x=1&y=%26",
      "https://www.spiegel.de/",
      "https://elpais.com/espana/2022-02-10/el-gobierno.html?ref=home",
      "https://news.example.co.uk/caf%C3%A9/na%C3%AFve",
  };
  for (const char* u : urls) {
    CAPTURE(u);
    const auto c = canonicalize(u);
    CHECK(canonicalize(to_string(c)) == c);
  }
}

TEST_CASE("canonicalize is idempotent on random path soup") {
  std::mt19937_64 rng(11);
  const std::string alphabet = "abcXYZ019-_./%20~";
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string path;
    const int len = static_cast<int>(rng() % 24);
    for (int k = 0; k < len; ++k) path += alphabet[rng() % alphabet.size()];
    const std::string url = "https://www.example.org/" + path;
    CanonicalUrl c;
    try {
      c = canonicalize(url);
    } catch (const UrlError&) {
      continue;
    }
    ++checked;
    CAPTURE(url);
    CHECK(canonicalize(to_string(c)) == c);
  }
  CHECK(checked > 1000);
}

TEST_CASE("public suffix list handles multi-label, wildcard and exception rules") {
  const auto& psl = PublicSuffixList::bundled();
  CHECK(psl.registered_domain("www.bbc.co.uk") == "bbc.co.uk");
  CHECK(psl.registered_domain("edition.cnn.com") == "cnn.com");
  CHECK(psl.registered_domain("www.lemonde.fr") == "lemonde.fr");
  CHECK(psl.registered_domain("co.uk").empty());
  CHECK(psl.public_suffix("foo.unknowntld") == "unknowntld");

  const auto custom = PublicSuffixList::parse("// comment\ncom\n*.ck\n!www.ck\n");
  CHECK(custom.public_suffix("a.b.ck") == "b.ck");
  CHECK(custom.registered_domain("a.b.ck") == "a.b.ck");
  CHECK(custom.registered_domain("www.ck") == "www.ck");
  CHECK(custom.registered_domain("shop.example.com") == "example.com");
}

TEST_CASE("tokenize_path splits words and keeps identifiers whole") {
  const auto t = tokenize_path(canonicalize("https://www.bbc.com/news/world-europe-60547473"));
  CHECK(t.tokens == std::vector<std::string>{"news", "world", "europe", "60547473"});
  CHECK(t.id_like == std::vector<bool>{false, false, false, true});
  CHECK(t.id_like_count == 1);
  CHECK(t.alpha_token_count == 3);

  const auto hex = tokenize_path(canonicalize("https://x.com/a/3f9c2b7e1d4a"));
  CHECK(hex.id_like_count == 1);
}

TEST_CASE("descriptiveness separates skip-eligible URL shapes") {
  auto verdict = [](const char* url) {
    return assess_descriptiveness(tokenize_path(canonicalize(url)));
  };
  const auto bbc = verdict("https://www.bbc.com/world-europe-60547473");
  CHECK(bbc.skip_eligible);
  CHECK(bbc.reason == SkipReason::no_linguistic_cues);

  const auto empty = verdict("https://www.example.com/?id=12");
  CHECK(empty.skip_eligible);
  CHECK(empty.reason == SkipReason::empty_path);

  const auto encoded = verdict("https://www.example.com/3f9c2b7e1d4a5b6c");
  CHECK(encoded.skip_eligible);
  CHECK(encoded.reason == SkipReason::encoded_path);

  const auto descriptive =
      verdict("https://www.lemonde.fr/politique/article/2022/macron-candidat.html");
  CHECK_FALSE(descriptive.skip_eligible);
  CHECK(descriptive.reason == SkipReason::descriptive);
  CHECK(descriptive.score > 0.5);
}

TEST_CASE("descriptiveness is monotone in the threshold") {
  const auto t = tokenize_path(canonicalize("https://x.com/news/world-europe-1"));
  bool previous = false;
  for (int threshold = 1; threshold <= 6; ++threshold) {
    const bool skip = assess_descriptiveness(t, threshold).skip_eligible;
    if (previous) CHECK(skip);
    previous = skip;
  }
}

TEST_CASE("common helpers") {
  CHECK(to_lower_ascii("AbC-É") == "abc-É");
  CHECK(trim("  x y \n") == "x y");
  CHECK(split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
  CHECK(utf8_length("café") == 4);
  CHECK(utf8_prefix("café au lait", 4) == "café");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  const auto t = parse_rfc3339("2022-02-22T11:15:00.250+01:00");
  REQUIRE(t.has_value());
  CHECK(format_rfc3339(*t) == "2022-02-22T10:15:00.250Z");
  CHECK(format_rfc3339(*parse_rfc3339("2022-02-22T10:15:00Z")) == "2022-02-22T10:15:00Z");
  CHECK_FALSE(parse_rfc3339("2022-02-30T10:15:00Z").has_value());
  CHECK_FALSE(parse_rfc3339("yesterday").has_value());

  CHECK(parse_country("uk") == Country::UK);
  CHECK_FALSE(parse_country("IT").has_value());
  CHECK(parse_mode("url") == Mode::url_only);
  CHECK(short_name(Mode::full_text) == "text");
}
