#pragma once

#include <string>
#include <string_view>

namespace plansum {

/// Classic Porter (1980) suffix-stripping stemmer for lowercase ASCII words.
/// Words shorter than three characters and non-alphabetic tokens are returned
/// unchanged.
std::string porter_stem(std::string_view word);

}  // namespace plansum
