#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace polurl::corpus {

inline constexpr std::size_t kMinMainTextChars = 200;

// Main article text of an HTML page: the contiguous run of <p> elements
// sharing a parent container with the most text, paragraphs joined by a blank
// line. Content inside nav/header/footer/aside/form and script/style is
// ignored. Documents without any <p> fall back to all visible text. Returns
// nullopt when the result is shorter than `min_chars` code points.
std::optional<std::string> extract_main_text(std::string_view html,
                                             std::size_t min_chars = kMinMainTextChars);

// Text of the first <title> element.
std::optional<std::string> extract_title(std::string_view html);

// &amp;, &#233;, &#xE9; and a small table of common named entities.
std::string decode_html_entities(std::string_view s);

}  // namespace polurl::corpus
