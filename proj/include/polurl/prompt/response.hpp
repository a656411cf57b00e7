#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

namespace polurl::prompt {

enum class Verdict { yes, no, skip };
std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

struct ModelAnswer {
  Verdict verdict = Verdict::no;
  std::optional<int> political_position;  // present iff verdict == yes, in 1..10
  std::string raw_digest;                 // sha256 of the raw response

  bool operator==(const ModelAnswer&) const = default;
};

nlohmann::json to_json(const ModelAnswer& a);
ModelAnswer answer_from_json(const nlohmann::json& j);

enum class ParseErrorKind { malformed, schema };

struct ParseError {
  ParseErrorKind kind = ParseErrorKind::malformed;
  std::string message;
};

// Drift counters exported with each run report.
struct ParseCounters {
  std::size_t parsed = 0;
  std::size_t repaired = 0;           // needed the fence/prose repair pass
  std::size_t coerced_position = 0;   // No/SKIP with a non-null position
  std::size_t malformed = 0;
  std::size_t schema = 0;

  ParseCounters& operator+=(const ParseCounters& o);
  nlohmann::json to_json() const;
};

using ParseResult = std::variant<ModelAnswer, ParseError>;

// Accepts a JSON object with "Answer" ("Yes"/"No"/"SKIP", case-insensitive)
// and "PoliticalPosition" (integer 1..10 or null). When the raw text is not
// itself an object, one repair pass drops <think> blocks and markdown fences
// and retries on the outermost {...}. Never throws.
ParseResult parse_response(std::string_view raw, bool allows_skip,
                           ParseCounters* counters = nullptr);

enum class PositionBin { left, center, right };
std::string_view to_string(PositionBin b);

// 1-3 left, 4-6 center, 7-10 right; throws std::out_of_range otherwise.
PositionBin bin_position(int position);

}  // namespace polurl::prompt
