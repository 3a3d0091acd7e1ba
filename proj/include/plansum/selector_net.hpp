#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plansum/error.hpp"
#include "plansum/nn/layers.hpp"

namespace plansum {

/// Content-selector hyperparameters.
struct SelectorConfig {
  std::size_t embed_dim = 200;
  std::size_t local_layers = 2;
  std::size_t global_layers = 2;
  std::size_t history_layers = 3;
  std::size_t heads = 8;
  std::size_t ff_dim = 1024;
  double dropout = 0.1;
  double stop_threshold = 0.6;
  std::size_t max_extract = 45;
  double lr = 1e-4;
  std::size_t epochs = 20;
  std::size_t episodes_per_doc = 4;
  // how many of the episodes_per_doc are replayed from the oracle episode set
  std::size_t oracle_episodes_per_doc = 2;
  std::uint64_t seed = 0;

  /// Model width; the BiLSTMs use embed_dim / 2 hidden units per direction.
  std::size_t model_dim() const { return embed_dim; }
  void validate() const;
  nlohmann::json to_json() const;
  static SelectorConfig from_json(const nlohmann::json& j);
  bool operator==(const SelectorConfig&) const = default;
};

inline void SelectorConfig::validate() const {
  if (!(stop_threshold > 0.0 && stop_threshold < 1.0)) throw Error("stop_threshold must lie in (0, 1)");
  if (max_extract < 1) throw Error("max_extract must be at least 1");
  if (embed_dim == 0 || local_layers == 0 || global_layers == 0 || history_layers == 0 || heads == 0 ||
      ff_dim == 0 || episodes_per_doc == 0) {
    throw Error("selector dimensions and counts must be positive");
  }
  if (embed_dim % 2 != 0) throw Error("embed_dim must be even");
  if (model_dim() % heads != 0) throw Error("heads must divide the model dimension");
  if (oracle_episodes_per_doc > episodes_per_doc) throw Error("oracle_episodes_per_doc exceeds episodes_per_doc");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must lie in [0, 1)");
}

inline nlohmann::json SelectorConfig::to_json() const {
  return {{"embed_dim", embed_dim},
          {"local_layers", local_layers},
          {"global_layers", global_layers},
          {"history_layers", history_layers},
          {"heads", heads},
          {"ff_dim", ff_dim},
          {"dropout", dropout},
          {"stop_threshold", stop_threshold},
          {"max_extract", max_extract},
          {"lr", lr},
          {"epochs", epochs},
          {"episodes_per_doc", episodes_per_doc},
          {"oracle_episodes_per_doc", oracle_episodes_per_doc},
          {"seed", seed}};
}

inline SelectorConfig SelectorConfig::from_json(const nlohmann::json& j) {
  SelectorConfig c;
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.local_layers = j.value("local_layers", c.local_layers);
  c.global_layers = j.value("global_layers", c.global_layers);
  c.history_layers = j.value("history_layers", c.history_layers);
  c.heads = j.value("heads", c.heads);
  c.ff_dim = j.value("ff_dim", c.ff_dim);
  c.dropout = j.value("dropout", c.dropout);
  c.stop_threshold = j.value("stop_threshold", c.stop_threshold);
  c.max_extract = j.value("max_extract", c.max_extract);
  c.lr = j.value("lr", c.lr);
  c.epochs = j.value("epochs", c.epochs);
  c.episodes_per_doc = j.value("episodes_per_doc", c.episodes_per_doc);
  c.oracle_episodes_per_doc = j.value("oracle_episodes_per_doc", c.oracle_episodes_per_doc);
  c.seed = j.value("seed", c.seed);
  return c;
}

/// One extraction-history block: self-attention among the remaining
/// sentences, attention over the extracted ones, then a feed-forward sublayer.
template <class T>
struct HistoryBlock {
  nn::AttentionSublayer<T> self_attention;
  nn::AttentionSublayer<T> extracted_attention;
  nn::FeedForwardSublayer<T> feed_forward;

  HistoryBlock() = default;
  HistoryBlock(nn::ParamStore<T>& store, const std::string& name, Eigen::Index dim, std::size_t heads,
               Eigen::Index ff, Rng& rng)
      : self_attention(store, name + ".self", dim, heads, rng),
        extracted_attention(store, name + ".extracted", dim, heads, rng),
        feed_forward(store, name + ".ff", dim, ff, rng) {}

  /// With no extracted sentences the second sublayer is skipped.
  nn::Var<T> operator()(nn::Tape<T>& tape, nn::Var<T> remaining, const nn::Var<T>* extracted,
                        const nn::Context<T>& ctx) const {
    auto x = self_attention(tape, remaining, remaining, ctx);
    if (extracted != nullptr) x = extracted_attention(tape, x, *extracted, ctx);
    return feed_forward(tape, x, ctx);
  }
};

/// Selection state: encoder outputs plus the extracted/remaining partition.
template <class T>
struct PolicyState {
  nn::Var<T> local;   // n x D
  nn::Var<T> global;  // n x D
  std::vector<std::size_t> extracted;
  std::vector<std::size_t> remaining;  // ascending

  /// Throws unless extracted and remaining are disjoint and cover 0..n-1.
  void check_partition() const {
    const auto n = static_cast<std::size_t>(local.rows());
    std::vector<int> seen(n, 0);
    for (auto i : extracted) {
      if (i >= n) throw Error("extracted index out of range");
      ++seen[i];
    }
    for (auto i : remaining) {
      if (i >= n) throw Error("remaining index out of range");
      ++seen[i];
    }
    if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
      throw Error("extracted and remaining sentences must partition the document");
    }
  }
};

template <class T>
struct PolicyOutput {
  nn::Var<T> log_probs;  // 1 x |remaining|, log-softmax over remaining sentences
  nn::Var<T> stop_logit;  // 1 x 1; p_stop = sigmoid(stop_logit)

  T p_stop() const { return nn::detail::stable_sigmoid(stop_logit.scalar()); }
};

inline std::vector<Eigen::Index> to_rows(const std::vector<std::size_t>& idx) {
  return {idx.begin(), idx.end()};
}

/// Local sentence encoder, global context encoder, extraction-history
/// encoder and the scoring/stopping heads.
template <class T>
class SelectorNet {
 public:
  SelectorNet(const SelectorConfig& cfg, std::uint64_t init_seed) : config_(cfg) {
    cfg.validate();
    Rng rng(init_seed);
    const auto d = static_cast<Eigen::Index>(cfg.embed_dim);
    const auto dm = static_cast<Eigen::Index>(cfg.model_dim());
    local_ = nn::BiLstm<T>(params_, "local.lstm", d, dm / 2, cfg.local_layers, rng);
    local_pool_ = nn::MultiHeadPool<T>(params_, "local.pool", dm, dm, cfg.heads, rng);
    global_ = nn::BiLstm<T>(params_, "global.lstm", dm, dm / 2, cfg.global_layers, rng);
    for (std::size_t l = 0; l < cfg.history_layers; ++l) {
      history_.emplace_back(params_, "history.block" + std::to_string(l), dm, cfg.heads,
                            static_cast<Eigen::Index>(cfg.ff_dim), rng);
    }
    score_hidden_ = nn::Linear<T>(params_, "score.hidden", 3 * dm, dm, rng);
    score_out_ = nn::Linear<T>(params_, "score.out", dm, 1, rng);
    stop_pool_ = nn::MultiHeadPool<T>(params_, "stop.pool", 3 * dm, dm, cfg.heads, rng);
    stop_out_ = nn::Linear<T>(params_, "stop.out", dm, 1, rng);
  }

  SelectorNet(SelectorNet&&) noexcept = default;
  SelectorNet& operator=(SelectorNet&&) noexcept = default;

  const SelectorConfig& config() const { return config_; }
  nn::ParamStore<T>& params() { return params_; }
  const nn::ParamStore<T>& params() const { return params_; }

  /// Same architecture in another precision with identical (cast) values.
  template <class U>
  SelectorNet<U> cast() const {
    SelectorNet<U> out(config_, 0);
    for (std::size_t i = 0; i < params_.size(); ++i) out.params()[i].value = params_[i].value.template cast<U>();
    return out;
  }

  /// One fixed-size vector per sentence: BiLSTM over the word embeddings
  /// (sentences batched and padded) followed by multi-head pooling.
  nn::Var<T> encode_local(nn::Tape<T>& tape, const std::vector<nn::Mat<T>>& sentences) const {
    if (sentences.empty()) throw Error("encode_local needs at least one sentence");
    const auto batch = static_cast<Eigen::Index>(sentences.size());
    const auto d = static_cast<Eigen::Index>(config_.embed_dim);
    std::vector<std::size_t> lengths;
    std::size_t longest = 0;
    for (const auto& s : sentences) {
      if (s.cols() != d) throw Error("sentence embeddings have the wrong width");
      lengths.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(s.rows())));
      longest = std::max(longest, lengths.back());
    }
    std::vector<nn::Var<T>> steps;
    for (std::size_t t = 0; t < longest; ++t) {
      nn::Mat<T> x = nn::Mat<T>::Zero(batch, d);
      for (Eigen::Index b = 0; b < batch; ++b) {
        if (static_cast<Eigen::Index>(t) < sentences[b].rows()) x.row(b) = sentences[b].row(t);
      }
      steps.push_back(tape.constant(std::move(x)));
    }
    const auto outputs = local_.run(tape, std::move(steps), lengths);
    const auto stacked = concat_rows<T>(std::span<const nn::Var<T>>(outputs));  // (t * B + b) rows
    std::vector<nn::Var<T>> pooled;
    pooled.reserve(sentences.size());
    for (Eigen::Index b = 0; b < batch; ++b) {
      std::vector<Eigen::Index> rows;
      for (std::size_t t = 0; t < lengths[b]; ++t) rows.push_back(static_cast<Eigen::Index>(t) * batch + b);
      pooled.push_back(local_pool_(tape, gather_rows(stacked, std::move(rows))));
    }
    return concat_rows<T>(std::span<const nn::Var<T>>(pooled));
  }

  nn::Var<T> encode_global(nn::Tape<T>& tape, nn::Var<T> local) const { return global_(tape, local); }

  /// History-aware embedding for each remaining sentence (rows follow `remaining`).
  nn::Var<T> encode_history(nn::Tape<T>& tape, nn::Var<T> local, const std::vector<std::size_t>& extracted,
                            const std::vector<std::size_t>& remaining, const nn::Context<T>& ctx = {}) const {
    if (remaining.empty()) throw Error("encode_history needs remaining sentences");
    auto x = gather_rows(local, to_rows(remaining));
    std::optional<nn::Var<T>> memory;
    if (!extracted.empty()) memory = gather_rows(local, to_rows(extracted));
    for (const auto& block : history_) x = block(tape, x, memory ? &*memory : nullptr, ctx);
    return x;
  }

  PolicyOutput<T> policy_step(nn::Tape<T>& tape, const PolicyState<T>& state, const nn::Context<T>& ctx = {}) const {
    const auto history = encode_history(tape, state.local, state.extracted, state.remaining, ctx);
    const auto rows = to_rows(state.remaining);
    const auto features =
        nn::concat_cols<T>({gather_rows(state.local, rows), gather_rows(state.global, rows), history});
    const auto scores = score_out_(tape, nn::relu(score_hidden_(tape, features)));  // r x 1
    const auto log_probs = nn::log_softmax_rows(nn::transpose(scores));
    const auto stop_logit = stop_out_(tape, nn::relu(stop_pool_(tape, features)));
    return {log_probs, stop_logit};
  }

 private:
  SelectorConfig config_;
  nn::ParamStore<T> params_;
  nn::BiLstm<T> local_;
  nn::MultiHeadPool<T> local_pool_;
  nn::BiLstm<T> global_;
  std::vector<HistoryBlock<T>> history_;
  nn::Linear<T> score_hidden_;
  nn::Linear<T> score_out_;
  nn::MultiHeadPool<T> stop_pool_;
  nn::Linear<T> stop_out_;
};

}  // namespace plansum
