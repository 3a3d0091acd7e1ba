#include "plansum/synthetic.hpp"

#include <algorithm>

#include "plansum/error.hpp"
#include "plansum/rng.hpp"

namespace plansum {

namespace {

constexpr const char* kSyllables[] = {"ba", "ke", "mi", "no", "ru", "sa", "te", "vi", "lo", "du"};

ParsedToken token(std::string form, const char* upos, int head, const char* deprel, bool space_after = true) {
  return {std::move(form), upos, head, deprel, space_after};
}

/// "The a v the b in c." or, without `c`, "The a v the b."
std::pair<std::string, ParsedSentence> make_sentence(const std::string& a, const std::string& v,
                                                     const std::string& b, const std::string* c) {
  ParsedSentence p;
  p.tokens.push_back(token("The", "DET", 1, "det"));
  p.tokens.push_back(token(a, "NOUN", 2, "nsubj"));
  p.tokens.push_back(token(v, "VERB", kRootHead, "root"));
  p.tokens.push_back(token("the", "DET", 4, "det"));
  if (c == nullptr) {
    p.tokens.push_back(token(b, "NOUN", 2, "obj", false));
  } else {
    p.tokens.push_back(token(b, "NOUN", 2, "obj"));
    p.tokens.push_back(token("in", "ADP", 6, "case"));
    p.tokens.push_back(token(*c, "NOUN", 2, "obl", false));
  }
  p.tokens.push_back(token(".", "PUNCT", 2, "punct"));
  return {p.text(), std::move(p)};
}

}  // namespace

std::string synthetic_word(std::size_t i) {
  std::string w;
  std::size_t x = i;
  for (int k = 0; k < 3 || x > 0; ++k) {
    w += kSyllables[x % 10];
    x /= 10;
  }
  return w;
}

bool synthetic_word_is_salient(std::size_t i, std::size_t vocab_size) { return i < vocab_size / 2; }

SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& o) {
  if (o.salient_per_doc >= o.sentences_per_doc) throw Error("salient_per_doc must be below sentences_per_doc");
  if (o.vocab_size < 8) throw Error("vocab_size must be at least 8");
  const std::size_t half = o.vocab_size / 2;
  SyntheticCorpus out;
  for (std::size_t d = 0; d < o.n_docs; ++d) {
    Rng rng(derive_seed(o.seed, "synthetic", d));
    auto salient_word = [&] { return synthetic_word(rng.below(half)); };
    auto distractor_word = [&] { return synthetic_word(half + rng.below(o.vocab_size - half)); };

    std::vector<std::size_t> positions(o.sentences_per_doc);
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
    rng.shuffle(positions.begin(), positions.end());
    std::vector<std::size_t> salient(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(o.salient_per_doc));
    std::sort(salient.begin(), salient.end());

    CaseRecord rec;
    rec.id = o.id_prefix + "-" + std::to_string(d);
    rec.doc_parses.emplace();
    rec.summary_parses.emplace();
    std::vector<std::string> summary;
    for (std::size_t i = 0; i < o.sentences_per_doc; ++i) {
      const bool is_salient = std::binary_search(salient.begin(), salient.end(), i);
      auto draw = [&] { return is_salient ? salient_word() : distractor_word(); };
      const auto a = draw();
      const auto v = draw();
      const auto b = draw();
      const auto c = draw();
      auto [text, parse] = make_sentence(a, v, b, &c);
      rec.doc_sentences.push_back(std::move(text));
      rec.doc_parses->push_back(std::move(parse));
      if (is_salient) {
        auto [stext, sparse] = make_sentence(a, v, b, nullptr);
        summary.push_back(std::move(stext));
        rec.summary_parses->push_back(std::move(sparse));
      }
    }
    if (summary.empty()) {
      auto [stext, sparse] = make_sentence(salient_word(), salient_word(), salient_word(), nullptr);
      summary.push_back(std::move(stext));
      rec.summary_parses->push_back(std::move(sparse));
    }
    for (std::size_t i = 0; i < summary.size(); ++i) rec.gold_summary += (i > 0 ? " " : "") + summary[i];
    out.corpus.push_back(std::move(rec));
    out.salient.push_back(std::move(salient));
  }
  return out;
}

EmbeddingTable make_synthetic_embeddings(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "synthetic.embeddings"));
  auto gaussian = [&](double scale) {
    std::vector<float> v(dim);
    for (auto& x : v) x = static_cast<float>(scale * rng.normal());
    return v;
  };
  const auto salient_center = gaussian(1.0);
  const auto distractor_center = gaussian(1.0);
  EmbeddingTable table(dim);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    const auto& center = synthetic_word_is_salient(i, vocab_size) ? salient_center : distractor_center;
    auto v = gaussian(0.5);
    for (std::size_t k = 0; k < dim; ++k) v[k] += center[k];
    table.insert(synthetic_word(i), std::move(v));
  }
  for (const char* w : {"the", "in", "."}) table.insert(w, gaussian(1.0));
  return table;
}

}  // namespace plansum
