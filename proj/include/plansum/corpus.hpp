#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace plansum {

inline constexpr int kRootHead = -1;

struct ParsedToken {
  std::string form;
  std::string upos;
  int head = kRootHead;  // 0-based index into the sentence, or kRootHead
  std::string deprel;
  bool space_after = true;  // from the CoNLL-U MISC column (SpaceAfter=No)
};

/// One dependency-parsed sentence. Construct through `validate()` or the
/// CoNLL-U reader so the single-root and head-range invariants hold.
struct ParsedSentence {
  std::vector<ParsedToken> tokens;

  /// Throws plansum::Error when the token list is empty, a head is out of
  /// range, or the sentence does not have exactly one root.
  void validate() const;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::size_t> children(std::size_t head) const;
  /// Tokens joined with spaces, honoring space_after.
  std::string text() const;
};

struct CaseRecord {
  std::string id;
  std::vector<std::string> doc_sentences;
  std::string gold_summary;
  std::optional<std::vector<ParsedSentence>> doc_parses;
  std::optional<std::vector<ParsedSentence>> summary_parses;
};

using Corpus = std::vector<CaseRecord>;

/// Reads one JSON object per line with fields `id`, `doc` (a string, which is
/// sentence-segmented, or a list of sentences) and `summary`. Optional
/// `doc_conllu_path` / `summary_conllu_path` are resolved relative to the
/// corpus file and loaded with load_parses(). Blank lines are skipped.
Corpus load_corpus(const std::filesystem::path& path);

/// Writes the corpus as JSONL. With `write_parses`, parses go to CoNLL-U files
/// in "<stem>.parses/" beside the corpus and are referenced by relative path.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path, bool write_parses = false);

const CaseRecord* find_record(const Corpus& corpus, const std::string& id);

}  // namespace plansum
