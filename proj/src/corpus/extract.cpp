#include "polurl/corpus/extract.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "polurl/common.hpp"

namespace polurl::corpus {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

const std::unordered_map<std::string_view, std::uint32_t>& named_entities() {
  static const std::unordered_map<std::string_view, std::uint32_t> table = {
      {"amp", '&'},      {"lt", '<'},       {"gt", '>'},       {"quot", '"'},
      {"apos", '\''},    {"nbsp", 0xA0},    {"mdash", 0x2014}, {"ndash", 0x2013},
      {"hellip", 0x2026}, {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C},
      {"rdquo", 0x201D}, {"laquo", 0xAB},   {"raquo", 0xBB},   {"euro", 0x20AC},
      {"copy", 0xA9},    {"aacute", 0xE1},  {"agrave", 0xE0},  {"acirc", 0xE2},
      {"auml", 0xE4},    {"ccedil", 0xE7},  {"eacute", 0xE9},  {"egrave", 0xE8},
      {"ecirc", 0xEA},   {"iacute", 0xED},  {"icirc", 0xEE},   {"ntilde", 0xF1},
      {"oacute", 0xF3},  {"ocirc", 0xF4},   {"ouml", 0xF6},    {"uacute", 0xFA},
      {"ugrave", 0xF9},  {"uuml", 0xFC},    {"szlig", 0xDF},   {"Eacute", 0xC9},
      {"Auml", 0xC4},    {"Ouml", 0xD6},    {"Uuml", 0xDC},
  };
  return table;
}

// Collapses runs of whitespace (including NBSP) to one space and trims.
std::string collapse_ws(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool nbsp = static_cast<unsigned char>(c) == 0xC2 && i + 1 < s.size() &&
                      static_cast<unsigned char>(s[i + 1]) == 0xA0;
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || nbsp) {
      pending_space = !out.empty();
      if (nbsp) ++i;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

const std::unordered_set<std::string_view> kRawText = {"script", "style", "noscript", "template",
                                                       "svg",    "iframe", "textarea", "title"};
const std::unordered_set<std::string_view> kBoilerplate = {"nav",  "header", "footer", "aside",
                                                           "form", "menu",   "button", "select",
                                                           "dialog"};
const std::unordered_set<std::string_view> kVoid = {
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param",
    "source", "track", "wbr"};
// Elements that implicitly close an open <p>.
const std::unordered_set<std::string_view> kClosesParagraph = {
    "p",  "div", "section", "article", "main", "ul", "ol", "li", "table", "h1", "h2",
    "h3", "h4",  "h5",      "h6",      "pre",  "blockquote", "figure", "hr", "dl"};

struct Tag {
  std::string name;
  bool closing = false;
  bool self_closing = false;
  std::size_t end = 0;  // index just past '>'
};

// Parses a tag starting at html[pos] == '<'. Returns nullopt when the '<'
// does not open a tag (it is then treated as text).
std::optional<Tag> parse_tag(std::string_view html, std::size_t pos) {
  Tag t;
  std::size_t i = pos + 1;
  if (i < html.size() && html[i] == '/') {
    t.closing = true;
    ++i;
  }
  const std::size_t name_start = i;
  while (i < html.size() && (std::isalnum(static_cast<unsigned char>(html[i])) || html[i] == '-' ||
                             html[i] == ':'))
    ++i;
  if (i == name_start) return std::nullopt;
  t.name = to_lower_ascii(html.substr(name_start, i - name_start));
  char quote = 0;
  for (; i < html.size(); ++i) {
    const char c = html[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      t.self_closing = i > pos && html[i - 1] == '/';
      t.end = i + 1;
      return t;
    }
  }
  t.end = html.size();
  return t;
}

// Case-insensitive search for an ASCII needle that is already lowercase.
std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.empty() || hay.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    std::size_t k = 0;
    while (k < needle.size() &&
           std::tolower(static_cast<unsigned char>(hay[i + k])) == needle[k])
      ++k;
    if (k == needle.size()) return i;
  }
  return std::string_view::npos;
}

struct Paragraph {
  std::size_t container = 0;
  std::size_t order = 0;
  std::string text;
};

}  // namespace

std::string decode_html_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back('&');
      continue;
    }
    const std::string_view ent = s.substr(i + 1, semi - i - 1);
    if (!ent.empty() && ent[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      const std::string_view digits = ent.substr(hex ? 2 : 1);
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (digits.empty() || ec != std::errc{} || p != digits.data() + digits.size()) {
        out.push_back('&');
        continue;
      }
      append_utf8(out, cp);
      i = semi;
      continue;
    }
    const auto& table = named_entities();
    if (const auto it = table.find(ent); it != table.end()) {
      append_utf8(out, it->second);
      i = semi;
    } else {
      out.push_back('&');
    }
  }
  return out;
}

std::optional<std::string> extract_title(std::string_view html) {
  const auto open = find_ci(html, "<title", 0);
  if (open == std::string_view::npos) return std::nullopt;
  const auto gt = html.find('>', open);
  if (gt == std::string_view::npos) return std::nullopt;
  const auto close = find_ci(html, "</title", gt);
  if (close == std::string_view::npos) return std::nullopt;
  std::string t = collapse_ws(decode_html_entities(html.substr(gt + 1, close - gt - 1)));
  if (t.empty()) return std::nullopt;
  return t;
}

std::optional<std::string> extract_main_text(std::string_view html, std::size_t min_chars) {
  std::vector<std::pair<std::string, std::size_t>> stack;  // open elements (name, id)
  std::size_t next_id = 1;
  int skip_depth = 0;          // nesting inside boilerplate containers
  std::string skip_name;       // outermost boilerplate element being skipped
  std::vector<Paragraph> paragraphs;
  std::optional<Paragraph> open_p;
  std::string all_text;
  bool saw_paragraph = false;

  auto close_paragraph = [&] {
    if (!open_p) return;
    open_p->text = collapse_ws(decode_html_entities(open_p->text));
    if (!open_p->text.empty()) paragraphs.push_back(std::move(*open_p));
    open_p.reset();
  };
  auto add_text = [&](std::string_view text) {
    if (skip_depth > 0) return;
    if (open_p) open_p->text.append(text);
    all_text.append(text);
  };

  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] != '<') {
      const auto next = html.find('<', i);
      const std::size_t end = next == std::string_view::npos ? html.size() : next;
      add_text(html.substr(i, end - i));
      i = end;
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      const auto end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
      const auto end = html.find('>', i);
      i = end == std::string_view::npos ? html.size() : end + 1;
      continue;
    }
    const auto tag = parse_tag(html, i);
    if (!tag) {
      add_text("<");
      ++i;
      continue;
    }
    i = tag->end;
    const std::string& name = tag->name;

    if (!tag->closing && kRawText.count(name) && !tag->self_closing) {
      const auto close = find_ci(html, "</" + name, i);
      if (close == std::string_view::npos) {
        i = html.size();
      } else {
        const auto gt = html.find('>', close);
        i = gt == std::string_view::npos ? html.size() : gt + 1;
      }
      continue;
    }

    if (skip_depth > 0) {
      if (name == skip_name && !kVoid.count(name)) {
        if (tag->closing) {
          --skip_depth;
        } else if (!tag->self_closing) {
          ++skip_depth;
        }
      }
      continue;
    }

    if (tag->closing) {
      if (name == "p") {
        close_paragraph();
      } else if (kClosesParagraph.count(name) || name == "td" || name == "body") {
        close_paragraph();
      }
      const auto it = std::find_if(stack.rbegin(), stack.rend(),
                                   [&](const auto& e) { return e.first == name; });
      if (it != stack.rend()) stack.erase(std::prev(it.base()), stack.end());
      add_text(" ");
      continue;
    }

    if (kBoilerplate.count(name)) {
      if (!tag->self_closing) {
        close_paragraph();
        skip_depth = 1;
        skip_name = name;
      }
      continue;
    }
    if (name == "br") {
      add_text(" ");
      continue;
    }
    if (kClosesParagraph.count(name)) close_paragraph();
    if (name == "p") {
      saw_paragraph = true;
      Paragraph p;
      p.container = stack.empty() ? 0 : stack.back().second;
      p.order = paragraphs.size();
      open_p = std::move(p);
    }
    if (!kVoid.count(name) && !tag->self_closing) {
      // An open <p> is not a container for nested paragraphs.
      if (name != "p") stack.emplace_back(name, next_id++);
    }
    add_text(" ");
  }
  close_paragraph();

  std::string best;
  if (saw_paragraph && !paragraphs.empty()) {
    // Group consecutive paragraphs sharing a container; keep the block with
    // the most text (first wins on ties).
    std::size_t best_len = 0;
    std::size_t k = 0;
    while (k < paragraphs.size()) {
      std::size_t j = k;
      std::size_t len = 0;
      while (j < paragraphs.size() && paragraphs[j].container == paragraphs[k].container) {
        len += utf8_length(paragraphs[j].text);
        ++j;
      }
      if (len > best_len) {
        best_len = len;
        best.clear();
        for (std::size_t m = k; m < j; ++m) {
          if (!best.empty()) best += "\n\n";
          best += paragraphs[m].text;
        }
      }
      k = j;
    }
  } else {
    best = collapse_ws(decode_html_entities(all_text));
  }
  if (best.empty() || utf8_length(best) < min_chars) return std::nullopt;
  return best;
}

}  // namespace polurl::corpus
