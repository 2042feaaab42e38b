#pragma once

#include <string>
#include <string_view>

namespace audit {

// Suffix-stripping stemmer for English using Porter's original rule list.
// Expects lowercase ASCII input; words of length <= 2 are returned unchanged.
std::string porter_stem(std::string_view word);

} // namespace audit
