#pragma once

#include <cstddef>
#include <string>

#include "polurl/common.hpp"

namespace polurl::prompt {

inline constexpr std::size_t kDefaultTruncationChars = 4000;

// A versioned prompt. `body` uses Python str.format conventions: "{{" and
// "}}" are literal braces and "{paragraph}" occurs exactly once.
struct PromptTemplate {
  std::string template_id;
  Mode mode = Mode::full_text;
  std::string body;
  bool allows_skip = false;
  std::string skip_block;  // appended after the body when allows_skip
};

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validates the placeholder count and the skip/mode pairing; throws TemplateError.
void validate(const PromptTemplate& t);

// Loads prompts/<template_id>.txt and its <template_id>.meta.json sidecar.
// With `enable_skip` false the template is loaded with allows_skip off.
PromptTemplate load_template(const std::string& prompts_dir, const std::string& template_id,
                             bool enable_skip = true);

struct ClassificationRequest {
  std::string item_id;
  Mode mode = Mode::full_text;
  std::string payload;  // article body or URL
  Country country = Country::US;
};

// Full-text payloads keep their first `truncation_chars` code points.
ClassificationRequest make_request(std::string item_id, Mode mode, std::string payload,
                                   Country country,
                                   std::size_t truncation_chars = kDefaultTruncationChars);

// Substitutes the payload verbatim and appends the skip block when allowed.
// Throws TemplateError on a mode mismatch or an empty payload.
std::string render_prompt(const PromptTemplate& t, const ClassificationRequest& request);

// Heading lines that introduce the payload in each mode.
inline constexpr std::string_view kTextHeading = "**Paragraph:**";
inline constexpr std::string_view kUrlHeading = "**URL:**";
inline constexpr std::string_view kFormatHeading = "**Required JSON Format:**";
inline constexpr std::string_view kSkipHeading = "**Abstention:**";

// Inverse of render_prompt for the bundled templates: recovers mode, payload
// and whether SKIP was offered. Used by the offline mock backend.
struct RenderedPromptView {
  Mode mode = Mode::full_text;
  std::string payload;
  bool allows_skip = false;
};
std::optional<RenderedPromptView> inspect_rendered_prompt(std::string_view prompt);

}  // namespace polurl::prompt
