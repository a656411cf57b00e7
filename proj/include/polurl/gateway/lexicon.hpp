#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "polurl/common.hpp"

namespace polurl::gateway {

// Bundled multilingual political lexicon (en, fr, de, es), lower case.
const std::set<std::string, std::less<>>& political_lexicon();

// Lower-cases ASCII and Latin-1 capitals (À..Þ) and splits on anything that
// is neither alphanumeric nor a non-ASCII byte.
std::vector<std::string> lexicon_tokens(std::string_view text);

// Deterministic stand-in for a model. Yes (position 5) iff a token hits the
// lexicon; in url_only mode the URL path tokens are used, and a
// skip-eligible URL answers SKIP when `allows_skip`.
std::string lexicon_classify(std::string_view payload, Mode mode, bool allows_skip);

}  // namespace polurl::gateway
