#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plansum/corpus.hpp"
#include "plansum/embeddings.hpp"

namespace plansum {

struct SyntheticOptions {
  std::size_t n_docs = 10;
  std::size_t sentences_per_doc = 30;
  std::size_t salient_per_doc = 5;
  std::size_t vocab_size = 400;  // content words; half salient, half distractor
  std::uint64_t seed = 0;
  std::string id_prefix = "synth";
};

struct SyntheticCorpus {
  Corpus corpus;                                // with document and summary parses
  std::vector<std::vector<std::size_t>> salient;  // planted indices per record, ascending
};

/// Documents of "The <n> <v> the <n> in <n>." sentences. Salient sentences
/// draw content words from the salient half of the vocabulary and each has a
/// summary sentence "The <n> <v> the <n>." reusing its first three content
/// words; distractors draw from the other half. With no salient sentences the
/// summary is one sentence of unused salient words. Throws unless
/// salient_per_doc < sentences_per_doc.
SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& options);

/// Content word `i` of the synthetic vocabulary.
std::string synthetic_word(std::size_t i);
bool synthetic_word_is_salient(std::size_t i, std::size_t vocab_size);

/// Gaussian vectors centred on one point per half of the vocabulary, so the
/// two halves are separable; function words get independent vectors.
EmbeddingTable make_synthetic_embeddings(std::size_t vocab_size, std::size_t dim, std::uint64_t seed);

}  // namespace plansum
