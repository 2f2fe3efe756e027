#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dibets::html {

// Values of every attribute named "href" (any element), entity-decoded, in
// document order. Script/style bodies and comments are skipped.
std::vector<std::string> href_values(std::string_view document);

// Visible text with script/style/noscript bodies removed and whitespace
// collapsed to single spaces.
std::string visible_text(std::string_view document);

std::string decode_entities(std::string_view text);

// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

}  // namespace dibets::html
