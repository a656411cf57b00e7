#include "polurl/prompt/response.hpp"

#include <cmath>
#include <stdexcept>

#include "polurl/common.hpp"
#include "polurl/hash.hpp"

namespace polurl::prompt {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::yes: return "Yes";
    case Verdict::no: return "No";
    case Verdict::skip: return "SKIP";
  }
  return "?";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  const std::string l = to_lower_ascii(trim(s));
  if (l == "yes") return Verdict::yes;
  if (l == "no") return Verdict::no;
  if (l == "skip") return Verdict::skip;
  return std::nullopt;
}

nlohmann::json to_json(const ModelAnswer& a) {
  return {{"Answer", to_string(a.verdict)},
          {"PoliticalPosition",
           a.political_position ? nlohmann::json(*a.political_position) : nlohmann::json(nullptr)},
          {"raw_digest", a.raw_digest}};
}

ModelAnswer answer_from_json(const nlohmann::json& j) {
  ModelAnswer a;
  const auto v = parse_verdict(j.at("Answer").get<std::string>());
  if (!v) throw std::invalid_argument("unknown Answer value");
  a.verdict = *v;
  if (j.contains("PoliticalPosition") && !j.at("PoliticalPosition").is_null())
    a.political_position = j.at("PoliticalPosition").get<int>();
  a.raw_digest = j.value("raw_digest", std::string());
  return a;
}

ParseCounters& ParseCounters::operator+=(const ParseCounters& o) {
  parsed += o.parsed;
  repaired += o.repaired;
  coerced_position += o.coerced_position;
  malformed += o.malformed;
  schema += o.schema;
  return *this;
}

nlohmann::json ParseCounters::to_json() const {
  return {{"parsed", parsed},
          {"repaired", repaired},
          {"coerced_position", coerced_position},
          {"malformed", malformed},
          {"schema", schema}};
}

namespace {

std::optional<nlohmann::json> try_object(std::string_view text) {
  auto j = nlohmann::json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

// Removes <think>...</think> blocks emitted by reasoning models.
std::string strip_think(std::string_view s) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = s.find("<think>", pos);
    if (open == std::string_view::npos) break;
    const auto close = s.find("</think>", open);
    out.append(s.substr(pos, open - pos));
    if (close == std::string_view::npos) {
      pos = s.size();
      break;
    }
    pos = close + 8;
  }
  out.append(s.substr(pos));
  return out;
}

std::string strip_fences(std::string_view s) {
  std::string out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto fence = s.find("```", pos);
    if (fence == std::string_view::npos) {
      out.append(s.substr(pos));
      break;
    }
    out.append(s.substr(pos, fence - pos));
    // Drop the fence and an info string such as "json" on the same line.
    auto eol = fence + 3;
    while (eol < s.size() && s[eol] != '\n' && s[eol] != '{' && s[eol] != '`') ++eol;
    pos = eol;
  }
  return out;
}

std::optional<nlohmann::json> repair(std::string_view raw) {
  const std::string cleaned = strip_fences(strip_think(raw));
  const auto open = cleaned.find('{');
  const auto close = cleaned.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
  return try_object(std::string_view(cleaned).substr(open, close - open + 1));
}

ParseError fail(ParseErrorKind kind, std::string msg, ParseCounters* counters) {
  if (counters) {
    if (kind == ParseErrorKind::malformed) {
      ++counters->malformed;
    } else {
      ++counters->schema;
    }
  }
  return ParseError{kind, std::move(msg)};
}

}  // namespace

ParseResult parse_response(std::string_view raw, bool allows_skip, ParseCounters* counters) {
  bool repaired = false;
  auto obj = try_object(raw);
  if (!obj) {
    obj = repair(raw);
    repaired = obj.has_value();
  }
  if (!obj) return fail(ParseErrorKind::malformed, "no JSON object found", counters);

  const auto answer_it = obj->find("Answer");
  if (answer_it == obj->end() || !answer_it->is_string())
    return fail(ParseErrorKind::schema, "\"Answer\" missing or not a string", counters);
  const auto verdict = parse_verdict(answer_it->get_ref<const std::string&>());
  if (!verdict)
    return fail(ParseErrorKind::schema,
                "\"Answer\" must be Yes, No or SKIP, got \"" +
                    answer_it->get_ref<const std::string&>().substr(0, 40) + "\"",
                counters);
  if (*verdict == Verdict::skip && !allows_skip)
    return fail(ParseErrorKind::schema, "SKIP is not allowed for this template", counters);

  ModelAnswer answer;
  answer.verdict = *verdict;
  answer.raw_digest = sha256_hex(raw);

  const auto pos_it = obj->find("PoliticalPosition");
  const bool has_position = pos_it != obj->end() && !pos_it->is_null();
  bool coerced = false;
  if (*verdict == Verdict::yes) {
    if (!has_position)
      return fail(ParseErrorKind::schema, "\"PoliticalPosition\" required when Answer is Yes",
                  counters);
    if (!pos_it->is_number())
      return fail(ParseErrorKind::schema, "\"PoliticalPosition\" must be a number", counters);
    const double p = pos_it->get<double>();
    if (!std::isfinite(p) || p != std::floor(p) || p < 1 || p > 10)
      return fail(ParseErrorKind::schema, "\"PoliticalPosition\" must be an integer in 1..10",
                  counters);
    answer.political_position = static_cast<int>(p);
  } else if (has_position) {
    coerced = true;
  }

  if (counters) {
    ++counters->parsed;
    if (repaired) ++counters->repaired;
    if (coerced) ++counters->coerced_position;
  }
  return answer;
}

std::string_view to_string(PositionBin b) {
  switch (b) {
    case PositionBin::left: return "left";
    case PositionBin::center: return "center";
    case PositionBin::right: return "right";
  }
  return "?";
}

PositionBin bin_position(int position) {
  if (position < 1 || position > 10)
    throw std::out_of_range("political position " + std::to_string(position) +
                            " outside 1..10");
  if (position <= 3) return PositionBin::left;
  if (position <= 6) return PositionBin::center;
  return PositionBin::right;
}

}  // namespace polurl::prompt
