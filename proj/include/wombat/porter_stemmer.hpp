#pragma once

#include <string>
#include <string_view>

namespace wombat {

/// Porter (1980) suffix-stripping stemmer, following the reference C
/// implementation (including its `bli`/`logi` rules in step 2).
///
/// Only words made entirely of lowercase ASCII letters are stemmed; any other
/// token is returned unchanged.
std::string porter_stem(std::string_view word);

} // namespace wombat
