#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "plansum/corpus.hpp"
#include "plansum/metrics.hpp"

namespace plansum {

/// Extractive supervision for one record: indices in document order.
struct ExtractLabels {
  std::string id;
  std::vector<std::size_t> selected;
  double oracle_score = 0.0;  // ROUGE-2 F1 of the selection against the gold summary
};

struct Episode {
  std::string id;
  std::vector<std::size_t> extraction_order;  // selection order, not document order
  double reward = 0.0;                        // mean ROUGE-1/2/L F1 of the selection
};

enum class InputSource { oracle, model };

struct HybridPair {
  std::string id;
  std::vector<std::size_t> input;
  InputSource source = InputSource::oracle;
};

struct HybridSet {
  std::vector<HybridPair> pairs;
  double mix_ratio = 0.5;

  double model_fraction() const;
};

/// Casefolded token ids for a document and its summary, shared by every
/// ROUGE evaluation over candidate selections of that document.
class TokenizedDocument {
 public:
  TokenizedDocument(const CaseRecord& record, const RougeConfig& cfg = {});

  std::size_t num_sentences() const { return sentences_.size(); }
  const std::vector<int>& sentence(std::size_t i) const { return sentences_[i]; }
  const std::vector<int>& summary() const { return summary_; }

  /// Tokens of the given sentences concatenated in document order.
  std::vector<int> concat(std::vector<std::size_t> indices) const;
  RougeScore rouge2(const std::vector<std::size_t>& indices) const;
  RougeTriple rouge(const std::vector<std::size_t>& indices) const;
  double reward(const std::vector<std::size_t>& indices) const { return rouge(indices).mean_f1(); }

 private:
  std::vector<std::vector<int>> sentences_;
  std::vector<int> summary_;
};

struct GreedyStep {
  std::size_t index;
  double score;  // ROUGE-2 F1 after adding `index`
};

/// Greedy ROUGE-2 selection path in selection order. Each step adds the
/// sentence giving the highest ROUGE-2 F1 of the document-ordered selection;
/// ties go to the lower index; the search stops when no sentence strictly
/// improves the score or `cap` sentences are selected.
std::vector<GreedyStep> greedy_oracle_path(const CaseRecord& record, std::size_t cap,
                                           const RougeConfig& cfg = {});

/// Throws plansum::Error when cap == 0 or the document is empty.
ExtractLabels greedy_oracle_labels(const CaseRecord& record, std::size_t cap,
                                   const RougeConfig& cfg = {});

/// High-reward training episodes by beam search over selection prefixes.
///
/// A prefix expands with its `branching` highest positive-ROUGE-2-gain
/// sentences; each depth keeps the `beam` prefixes with the best mean-ROUGE
/// reward; a prefix completes when no sentence has positive gain or it reaches
/// `cap`. Searches are run for every branching factor 1..branching and their
/// completed episodes pooled, so the best reward never decreases as the
/// branching factor grows. Result is deduplicated and sorted by reward
/// descending.
std::vector<Episode> generate_episodes(const CaseRecord& record, std::size_t branching,
                                       std::size_t beam, std::size_t cap,
                                       const RougeConfig& cfg = {});

/// Per record (in `oracle_inputs` order), draws the model input with
/// probability `mix_ratio` from a generator seeded with `seed`. Records absent
/// from `model_inputs` fall back to the oracle input.
HybridSet build_hybrid_set(const std::vector<std::pair<std::string, std::vector<std::size_t>>>& oracle_inputs,
                           const std::map<std::string, std::vector<std::size_t>>& model_inputs,
                           double mix_ratio, std::uint64_t seed);

nlohmann::json to_json(const ExtractLabels& labels);
ExtractLabels labels_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Episode& episode);
Episode episode_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HybridPair& pair);

}  // namespace plansum
