#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "plansum/checkpoint.hpp"
#include "plansum/corpus.hpp"
#include "plansum/embeddings.hpp"
#include "plansum/nn/adam.hpp"
#include "plansum/oracle.hpp"
#include "plansum/selector_net.hpp"

namespace plansum {

/// Trainable selector: network parameters, optimizer state and progress.
struct SelectorModel {
  SelectorConfig config;
  SelectorNet<float> net;
  nn::AdamState<float> adam;
  std::uint64_t step = 0;

  explicit SelectorModel(const SelectorConfig& cfg);

  SelectorModel clone() const;
  Checkpoint to_checkpoint() const;
  static SelectorModel from_checkpoint(const Checkpoint& ckpt);
};

void save_selector(const SelectorModel& model, const std::filesystem::path& path);
SelectorModel load_selector(const std::filesystem::path& path);

/// Word-embedding matrices (tokens x d) for every sentence of a record.
std::vector<nn::Mat<float>> embed_sentences(const std::vector<std::string>& sentences,
                                            const EmbeddingTable& embeddings);

enum class EpisodeMode { sample, greedy };

struct EpisodeResult {
  Episode episode;
  std::vector<double> stop_probabilities;  // p_stop at each decision step
};

/// Rolls out one extraction episode. In sample mode the stop decision is drawn
/// first, then a sentence from the selection distribution; in greedy mode the
/// episode stops as soon as p_stop >= stop_threshold and otherwise takes the
/// most probable sentence. `rng` is only used in sample mode.
EpisodeResult run_episode(const CaseRecord& record, const SelectorModel& model, const EmbeddingTable& embeddings,
                          EpisodeMode mode, Rng* rng = nullptr);

/// Greedy inference; indices re-sorted into document order.
ExtractLabels select(const CaseRecord& record, const SelectorModel& model, const EmbeddingTable& embeddings);

struct EpochStats {
  std::size_t epoch = 0;
  double mean_reward = 0.0;      // over all training episodes of the epoch
  double validation_rouge_l = 0.0;
  std::size_t skipped_updates = 0;  // updates with zero advantage everywhere
};

/// REINFORCE with a mean-reward baseline. Each update processes one document:
/// it draws `oracle_episodes_per_doc` episodes from the document's high-reward
/// oracle episodes and samples the rest from the current policy, then applies
/// one Adam step on  -sum_e (reward_e - baseline) * sum_t log pi(a_t).
class SelectorTrainer {
 public:
  SelectorTrainer(const Corpus& train, const EmbeddingTable& embeddings,
                  std::map<std::string, std::vector<Episode>> oracle_episodes, SelectorModel& model);

  std::size_t updates_per_epoch() const { return train_.size(); }

  /// Performs update number `model.step` and advances it. Returns the mean
  /// reward of the update's episodes.
  double update();
  bool last_update_skipped() const { return last_skipped_; }

  /// Loss for one document built on `tape` with explicit episodes; exposed so
  /// the gradient path can be checked independently of sampling.
  static nn::Var<float> reinforce_loss(nn::Tape<float>& tape, const SelectorNet<float>& net,
                                       const std::vector<nn::Mat<float>>& sentences,
                                       const std::vector<Episode>& episodes, const SelectorConfig& cfg,
                                       const nn::Context<float>& ctx);

 private:
  const Corpus& train_;
  const EmbeddingTable& embeddings_;
  std::map<std::string, std::vector<Episode>> oracle_episodes_;
  SelectorModel& model_;
  std::vector<std::vector<nn::Mat<float>>> inputs_;
  std::vector<TokenizedDocument> docs_;
  bool last_skipped_ = false;
};

struct TrainOptions {
  const Corpus* validation = nullptr;  // best epoch chosen by validation ROUGE-L when set
  std::function<void(const EpochStats&)> on_epoch;
};

SelectorModel train_reinforce(const Corpus& train, const EmbeddingTable& embeddings,
                              const std::map<std::string, std::vector<Episode>>& oracle_episodes,
                              const SelectorConfig& cfg, const TrainOptions& options = {});

/// Continues from `model.step` until config.epochs epochs are complete. A
/// resumed run performs exactly the updates an uninterrupted run would.
SelectorModel continue_training(SelectorModel model, const Corpus& train, const EmbeddingTable& embeddings,
                                const std::map<std::string, std::vector<Episode>>& oracle_episodes,
                                const TrainOptions& options = {});

/// Mean ROUGE-L F1 of greedy selections against the gold summaries.
double validation_rouge_l(const Corpus& corpus, const SelectorModel& model, const EmbeddingTable& embeddings);

}  // namespace plansum
