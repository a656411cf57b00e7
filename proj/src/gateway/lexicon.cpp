#include "polurl/gateway/lexicon.hpp"

#include <cctype>

#include "polurl/urlkit/url.hpp"

namespace polurl::gateway {

const std::set<std::string, std::less<>>& political_lexicon() {
  static const std::set<std::string, std::less<>> words = {
      // en
      "parliament", "parliamentary", "election", "elections", "electoral", "government",
      "minister", "ministers", "president", "presidential", "senate", "senator", "congress",
      "congressional", "legislation", "lawmakers", "referendum", "coalition", "opposition",
      "politics", "political", "politician", "democrats", "republicans", "labour", "tory",
      "tories", "brexit", "chancellor", "cabinet", "governor", "impeachment", "mps",
      "voters", "ballot",
      // fr
      "parlement", "élection", "élections", "électoral", "gouvernement", "ministre",
      "président", "présidentielle", "sénat", "assemblée", "député", "députés", "législatives",
      "scrutin", "politique", "macron", "elysee", "élysée",
      // de
      "bundestag", "bundesrat", "wahl", "wahlen", "regierung", "kanzler", "bundeskanzler",
      "partei", "koalition", "abgeordnete", "landtag", "politik", "cdu", "spd", "afd",
      // es
      "gobierno", "congreso", "elecciones", "elección", "parlamento", "ministro", "ministra",
      "presidente", "senado", "diputados", "votación", "psoe", "política", "político",
  };
  return words;
}

std::vector<std::string> lexicon_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  const auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      if (std::isalnum(c)) {
        cur.push_back(static_cast<char>(std::tolower(c)));
      } else {
        flush();
      }
      continue;
    }
    // UTF-8 Latin-1 capitals U+00C0..U+00DE (except U+00D7) fold to lower case.
    if (c == 0xC3 && i + 1 < text.size()) {
      auto next = static_cast<unsigned char>(text[i + 1]);
      if (next >= 0x80 && next <= 0x9E && next != 0x97) next += 0x20;
      cur.push_back(static_cast<char>(c));
      cur.push_back(static_cast<char>(next));
      ++i;
      continue;
    }
    cur.push_back(static_cast<char>(c));
  }
  flush();
  return out;
}

namespace {

constexpr std::string_view kYes = R"({"Answer": "Yes", "PoliticalPosition": 5})";
constexpr std::string_view kNo = R"({"Answer": "No", "PoliticalPosition": null})";
constexpr std::string_view kSkip = R"({"Answer": "SKIP", "PoliticalPosition": null})";

bool hits(const std::vector<std::string>& tokens) {
  const auto& lex = political_lexicon();
  for (const auto& t : tokens)
    if (lex.count(t)) return true;
  return false;
}

}  // namespace

std::string lexicon_classify(std::string_view payload, Mode mode, bool allows_skip) {
  if (mode == Mode::full_text) return std::string(hits(lexicon_tokens(payload)) ? kYes : kNo);

  urlkit::UrlTokens tokens;
  try {
    tokens = urlkit::tokenize_path(urlkit::canonicalize(payload));
  } catch (const urlkit::UrlError&) {
    return std::string(allows_skip ? kSkip : kNo);
  }
  if (allows_skip && urlkit::assess_descriptiveness(tokens).skip_eligible)
    return std::string(kSkip);
  std::vector<std::string> words;
  for (const auto& t : tokens.tokens) {
    auto sub = lexicon_tokens(t);
    words.insert(words.end(), sub.begin(), sub.end());
  }
  return std::string(hits(words) ? kYes : kNo);
}

}  // namespace polurl::gateway
