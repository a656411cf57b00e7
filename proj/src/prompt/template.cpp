#include "polurl/prompt/template.hpp"

#include <filesystem>

#include <nlohmann/json.hpp>

namespace polurl::prompt {

namespace {

constexpr std::string_view kPlaceholder = "paragraph";

// Python str.format expansion restricted to a single named field. Returns
// the number of placeholders seen; throws on malformed braces.
std::size_t expand(std::string_view body, std::string_view payload, std::string* out) {
  std::size_t placeholders = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c == '{') {
      if (i + 1 < body.size() && body[i + 1] == '{') {
        if (out) out->push_back('{');
        ++i;
        continue;
      }
      const auto close = body.find('}', i + 1);
      if (close == std::string_view::npos) throw TemplateError("unterminated '{' in template");
      const auto name = body.substr(i + 1, close - i - 1);
      if (name != kPlaceholder)
        throw TemplateError("unknown template field '{" + std::string(name) + "}'");
      ++placeholders;
      if (out) out->append(payload);
      i = close;
    } else if (c == '}') {
      if (i + 1 < body.size() && body[i + 1] == '}') {
        if (out) out->push_back('}');
        ++i;
        continue;
      }
      throw TemplateError("single '}' in template");
    } else if (out) {
      out->push_back(c);
    }
  }
  return placeholders;
}

}  // namespace

void validate(const PromptTemplate& t) {
  if (expand(t.body, {}, nullptr) != 1)
    throw TemplateError("template " + t.template_id + " must contain {paragraph} exactly once");
  if (t.allows_skip && t.mode != Mode::url_only)
    throw TemplateError("template " + t.template_id + ": SKIP is only allowed in url_only mode");
}

PromptTemplate load_template(const std::string& prompts_dir, const std::string& template_id,
                             bool enable_skip) {
  namespace fs = std::filesystem;
  const fs::path dir(prompts_dir);
  PromptTemplate t;
  t.template_id = template_id;
  t.body = read_file((dir / (template_id + ".txt")).string());
  const auto meta_path = dir / (template_id + ".meta.json");
  nlohmann::json meta = nlohmann::json::object();
  if (fs::exists(meta_path)) {
    try {
      meta = nlohmann::json::parse(read_file(meta_path.string()));
    } catch (const nlohmann::json::exception& e) {
      throw TemplateError(meta_path.string() + ": " + e.what());
    }
  }
  const auto mode = parse_mode(meta.value("mode", std::string("full_text")));
  if (!mode) throw TemplateError(meta_path.string() + ": unknown mode");
  t.mode = *mode;
  t.allows_skip = enable_skip && meta.value("allows_skip", false);
  if (t.allows_skip) {
    const std::string skip_file = meta.value("skip_block", std::string());
    if (skip_file.empty()) throw TemplateError(meta_path.string() + ": allows_skip needs skip_block");
    t.skip_block = read_file((dir / skip_file).string());
  }
  validate(t);
  return t;
}

ClassificationRequest make_request(std::string item_id, Mode mode, std::string payload,
                                   Country country, std::size_t truncation_chars) {
  ClassificationRequest r;
  r.item_id = std::move(item_id);
  r.mode = mode;
  r.country = country;
  if (mode == Mode::full_text) {
    r.payload = std::string(utf8_prefix(payload, truncation_chars));
  } else {
    r.payload = trim(payload);
  }
  return r;
}

std::string render_prompt(const PromptTemplate& t, const ClassificationRequest& request) {
  if (t.mode != request.mode)
    throw TemplateError("template " + t.template_id + " is " + std::string(to_string(t.mode)) +
                        " but request " + request.item_id + " is " +
                        std::string(to_string(request.mode)));
  if (request.payload.empty()) throw TemplateError("empty payload for item " + request.item_id);
  std::string out;
  out.reserve(t.body.size() + request.payload.size() + t.skip_block.size());
  expand(t.body, request.payload, &out);
  if (t.allows_skip && t.mode == Mode::url_only) out += t.skip_block;
  return out;
}

std::optional<RenderedPromptView> inspect_rendered_prompt(std::string_view prompt) {
  RenderedPromptView v;
  auto heading = prompt.find(kUrlHeading);
  std::size_t heading_len = kUrlHeading.size();
  if (heading != std::string_view::npos) {
    v.mode = Mode::url_only;
  } else {
    heading = prompt.find(kTextHeading);
    heading_len = kTextHeading.size();
    if (heading == std::string_view::npos) return std::nullopt;
    v.mode = Mode::full_text;
  }
  const auto open = prompt.find('"', heading + heading_len);
  // The payload may itself contain the format heading; the rendered one is the last.
  const auto format = prompt.rfind(kFormatHeading);
  if (open == std::string_view::npos || format == std::string_view::npos || format < open)
    return std::nullopt;
  const auto close = prompt.rfind('"', format);
  if (close == std::string_view::npos || close <= open) return std::nullopt;
  v.payload = std::string(prompt.substr(open + 1, close - open - 1));
  v.allows_skip = prompt.find(kSkipHeading, format) != std::string_view::npos;
  return v;
}

}  // namespace polurl::prompt
