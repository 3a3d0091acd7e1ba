#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace plansum {

/// Splits running text into sentences at '.', '?' and '!' boundaries.
///
/// Boundaries are placed only after a whitespace-delimited word that ends in
/// terminal punctuation (optionally followed by closing quotes or brackets),
/// when that word is not a guarded abbreviation ("Inc.", "v.", "No.", "U.S.",
/// single-letter initials, ...) and the next word does not start with a
/// lowercase letter. Each sentence is its words joined by single spaces, so
/// joining the result with single spaces reproduces the input word sequence.
std::vector<std::string> segment_sentences(std::string_view text);

/// True if `word` (including its trailing period) is on the abbreviation list.
bool is_guarded_abbreviation(std::string_view word);

/// Splits on Unicode whitespace and punctuation. Punctuation becomes separate
/// tokens, except for '.', ',', '\'', '-', '/', ':' and '&' between two word
/// characters ("25,000", "third-party", "Kimbrell's"). Casefolding lowercases
/// ASCII and Latin-1 letters.
std::vector<std::string> tokenize(std::string_view sentence, bool casefold = false);

/// Splits on whitespace only.
std::vector<std::string> split_whitespace(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string casefold(std::string_view word);

}  // namespace plansum
