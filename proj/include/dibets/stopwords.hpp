#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

namespace dibets {

using StopwordSet = std::unordered_set<std::string>;

// Standard 179-word English list.
const StopwordSet& default_stopwords();

// One word per line; blank lines and '#' comments ignored; words lowercased.
StopwordSet parse_stopwords(std::string_view text);

}  // namespace dibets
