#pragma once

#include <string>
#include <string_view>

namespace dibets {

// Porter (1980) suffix-stripping stemmer for lowercase ASCII words. Words of
// two letters or fewer, and anything containing non a-z characters, are
// returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace dibets
