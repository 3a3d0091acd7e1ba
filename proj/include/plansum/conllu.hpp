#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "plansum/corpus.hpp"

namespace plansum {

/// Reads a CoNLL-U file. Multiword-token ranges ("3-4") and empty nodes
/// ("5.1") are skipped; comment lines are ignored. Errors carry the 1-based
/// sentence ordinal.
std::vector<ParsedSentence> load_parses(const std::filesystem::path& path);
std::vector<ParsedSentence> read_conllu(std::istream& in);

void write_conllu(std::ostream& out, const std::vector<ParsedSentence>& sentences);

}  // namespace plansum
