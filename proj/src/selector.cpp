#include "plansum/selector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "plansum/error.hpp"
#include "plansum/metrics.hpp"
#include "plansum/text.hpp"

namespace plansum {

namespace {

using nn::Mat;
using nn::Tape;
using nn::Var;

enum class RolloutMode { sample, greedy, forced };

struct Rollout {
  std::vector<std::size_t> order;
  std::vector<double> p_stop;
  std::vector<Var<float>> log_terms;  // one 1x1 term per decision taken
};

Rollout rollout(Tape<float>& tape, const SelectorNet<float>& net, Var<float> local, Var<float> global,
                const SelectorConfig& cfg, const nn::Context<float>& ctx, RolloutMode mode, Rng* rng,
                const std::vector<std::size_t>* forced) {
  const auto n = static_cast<std::size_t>(local.rows());
  PolicyState<float> state{local, global, {}, {}};
  state.remaining.resize(n);
  std::iota(state.remaining.begin(), state.remaining.end(), std::size_t{0});
  Rollout out;
  while (!state.remaining.empty() && state.extracted.size() < cfg.max_extract) {
    const auto policy = net.policy_step(tape, state, ctx);
    const double p_stop = policy.p_stop();
    out.p_stop.push_back(p_stop);
    bool stop = false;
    std::size_t pick = 0;  // position within remaining
    const auto& lp = policy.log_probs.value();
    switch (mode) {
      case RolloutMode::sample: {
        stop = rng->bernoulli(p_stop);
        if (!stop) {
          const double u = rng->uniform();
          double acc = 0.0;
          pick = state.remaining.size() - 1;
          for (Eigen::Index j = 0; j < lp.cols(); ++j) {
            acc += std::exp(static_cast<double>(lp(0, j)));
            if (u < acc) {
              pick = static_cast<std::size_t>(j);
              break;
            }
          }
        }
        break;
      }
      case RolloutMode::greedy: {
        stop = p_stop >= cfg.stop_threshold;
        Eigen::Index best = 0;
        lp.row(0).maxCoeff(&best);
        pick = static_cast<std::size_t>(best);
        break;
      }
      case RolloutMode::forced: {
        const std::size_t t = state.extracted.size();
        stop = t >= forced->size();
        if (!stop) {
          const auto it = std::find(state.remaining.begin(), state.remaining.end(), (*forced)[t]);
          if (it == state.remaining.end()) throw Error("episode repeats or exceeds sentence indices");
          pick = static_cast<std::size_t>(it - state.remaining.begin());
        }
        break;
      }
    }
    if (stop) {
      out.log_terms.push_back(nn::log_sigmoid(policy.stop_logit));
      break;
    }
    out.log_terms.push_back(nn::log_sigmoid(nn::scale(policy.stop_logit, -1.0f)));
    out.log_terms.push_back(nn::element(policy.log_probs, 0, static_cast<Eigen::Index>(pick)));
    const std::size_t chosen = state.remaining[pick];
    out.order.push_back(chosen);
    state.extracted.push_back(chosen);
    state.remaining.erase(state.remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

Var<float> total_log_prob(Tape<float>& tape, const std::vector<Var<float>>& terms) {
  if (terms.empty()) return tape.constant(Mat<float>::Zero(1, 1));
  return nn::sum(nn::concat_cols<float>(std::span<const Var<float>>(terms)));
}

/// -sum_e (r_e - mean r) * log pi(e); nullopt when every advantage is zero.
std::optional<Var<float>> policy_gradient_loss(const std::vector<Var<float>>& log_probs,
                                               const std::vector<double>& rewards) {
  const double baseline = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
  std::vector<Var<float>> terms;
  for (std::size_t e = 0; e < rewards.size(); ++e) {
    const double adv = rewards[e] - baseline;
    if (std::abs(adv) < 1e-12) continue;
    terms.push_back(nn::scale(log_probs[e], static_cast<float>(-adv)));
  }
  if (terms.empty()) return std::nullopt;
  return nn::sum(nn::concat_cols<float>(std::span<const Var<float>>(terms)));
}

std::vector<std::size_t> document_order(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, std::uint64_t epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "epoch", epoch));
  rng.shuffle(order.begin(), order.end());
  return order;
}

std::vector<std::size_t> block_shape(const Mat<float>& m) {
  return {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
}

WeightBlock to_block(const std::string& name, const Mat<float>& m) {
  return {name, block_shape(m), std::vector<float>(m.data(), m.data() + m.size())};
}

void from_block(const WeightBlock& b, Mat<float>& m) {
  if (b.shape != block_shape(m)) throw Error("checkpoint block " + b.name + " has the wrong shape");
  std::copy(b.data.begin(), b.data.end(), m.data());
}

}  // namespace

SelectorModel::SelectorModel(const SelectorConfig& cfg)
    : config(cfg), net(cfg, derive_seed(cfg.seed, "selector.init")), adam(net.params(), nn::AdamHyper{cfg.lr}) {}

SelectorModel SelectorModel::clone() const {
  SelectorModel out(config);
  for (std::size_t i = 0; i < net.params().size(); ++i) out.net.params()[i].value = net.params()[i].value;
  out.adam = adam;
  out.step = step;
  return out;
}

Checkpoint SelectorModel::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.metadata = {{"kind", "selector"},
                   {"config", config.to_json()},
                   {"seed", config.seed},
                   {"step", step},
                   {"adam_step", adam.step}};
  const auto& params = net.params();
  for (std::size_t i = 0; i < params.size(); ++i) ckpt.blocks.push_back(to_block("param/" + params[i].name, params[i].value));
  for (std::size_t i = 0; i < params.size(); ++i) ckpt.blocks.push_back(to_block("adam_m/" + params[i].name, adam.m[i]));
  for (std::size_t i = 0; i < params.size(); ++i) ckpt.blocks.push_back(to_block("adam_v/" + params[i].name, adam.v[i]));
  return ckpt;
}

SelectorModel SelectorModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.metadata.value("kind", "") != "selector") throw Error("checkpoint does not hold a selector");
  SelectorModel model(SelectorConfig::from_json(ckpt.metadata.at("config")));
  model.step = ckpt.metadata.at("step").get<std::uint64_t>();
  model.adam.step = ckpt.metadata.at("adam_step").get<std::uint64_t>();
  auto& params = model.net.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    from_block(ckpt.block("param/" + params[i].name), params[i].value);
    from_block(ckpt.block("adam_m/" + params[i].name), model.adam.m[i]);
    from_block(ckpt.block("adam_v/" + params[i].name), model.adam.v[i]);
  }
  return model;
}

void save_selector(const SelectorModel& model, const std::filesystem::path& path) {
  save_checkpoint(model.to_checkpoint(), path);
}

SelectorModel load_selector(const std::filesystem::path& path) {
  return SelectorModel::from_checkpoint(load_checkpoint(path));
}

std::vector<Mat<float>> embed_sentences(const std::vector<std::string>& sentences, const EmbeddingTable& embeddings) {
  std::vector<Mat<float>> out;
  out.reserve(sentences.size());
  const auto d = static_cast<Eigen::Index>(embeddings.dim());
  for (const auto& s : sentences) {
    const auto tokens = tokenize(s, true);
    Mat<float> m(static_cast<Eigen::Index>(tokens.size()), d);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      const auto v = embeddings.lookup(tokens[t]);
      std::copy(v.begin(), v.end(), m.row(static_cast<Eigen::Index>(t)).data());
    }
    out.push_back(std::move(m));
  }
  return out;
}

EpisodeResult run_episode(const CaseRecord& record, const SelectorModel& model, const EmbeddingTable& embeddings,
                          EpisodeMode mode, Rng* rng) {
  if (record.doc_sentences.empty()) throw Error("record " + record.id + " has no sentences");
  if (embeddings.dim() != model.config.embed_dim) throw Error("embedding dimension does not match the selector");
  if (mode == EpisodeMode::sample && rng == nullptr) throw Error("sampling needs a random generator");
  Tape<float> tape;
  const auto local = model.net.encode_local(tape, embed_sentences(record.doc_sentences, embeddings));
  const auto global = model.net.encode_global(tape, local);
  const auto r = rollout(tape, model.net, local, global, model.config, {}, 
                         mode == EpisodeMode::sample ? RolloutMode::sample : RolloutMode::greedy, rng, nullptr);
  const TokenizedDocument doc(record);
  EpisodeResult result;
  result.episode.id = record.id;
  result.episode.extraction_order = r.order;
  result.episode.reward = doc.reward(r.order);
  result.stop_probabilities = r.p_stop;
  return result;
}

ExtractLabels select(const CaseRecord& record, const SelectorModel& model, const EmbeddingTable& embeddings) {
  const auto ep = run_episode(record, model, embeddings, EpisodeMode::greedy);
  ExtractLabels labels;
  labels.id = record.id;
  labels.selected = document_order(ep.episode.extraction_order);
  labels.oracle_score = TokenizedDocument(record).rouge2(labels.selected).f1;
  return labels;
}

SelectorTrainer::SelectorTrainer(const Corpus& train, const EmbeddingTable& embeddings,
                                 std::map<std::string, std::vector<Episode>> oracle_episodes, SelectorModel& model)
    : train_(train), embeddings_(embeddings), oracle_episodes_(std::move(oracle_episodes)), model_(model) {
  if (train.empty()) throw Error("training corpus is empty");
  if (embeddings.dim() != model.config.embed_dim) throw Error("embedding dimension does not match the selector");
  for (const auto& rec : train) {
    if (rec.doc_sentences.empty()) throw Error("record " + rec.id + " has no sentences");
    inputs_.push_back(embed_sentences(rec.doc_sentences, embeddings));
    docs_.emplace_back(rec);
  }
}

double SelectorTrainer::update() {
  const auto& cfg = model_.config;
  const std::uint64_t s = model_.step;
  const std::size_t n = train_.size();
  const auto order = epoch_order(cfg.seed, s / n, n);
  const std::size_t di = order[s % n];
  const auto& rec = train_[di];
  last_skipped_ = false;

  Rng rng(derive_seed(cfg.seed, "update", s));
  const nn::Context<float> ctx{true, static_cast<float>(cfg.dropout), &rng};
  auto& net = model_.net;
  net.params().zero_grad();

  Tape<float> tape;
  const auto local = net.encode_local(tape, inputs_[di]);
  const auto global = net.encode_global(tape, local);

  // Replayed episodes are drawn without replacement from the oracle pool.
  std::vector<const Episode*> pool;
  if (const auto it = oracle_episodes_.find(rec.id); it != oracle_episodes_.end()) {
    for (const auto& e : it->second) pool.push_back(&e);
  }
  std::vector<Var<float>> log_probs;
  std::vector<double> rewards;
  for (std::size_t e = 0; e < cfg.episodes_per_doc; ++e) {
    Rollout r;
    if (e < cfg.oracle_episodes_per_doc && !pool.empty()) {
      const auto k = static_cast<std::size_t>(rng.below(pool.size()));
      std::vector<std::size_t> forced = pool[k]->extraction_order;
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
      if (forced.size() > cfg.max_extract) forced.resize(cfg.max_extract);
      r = rollout(tape, net, local, global, cfg, ctx, RolloutMode::forced, nullptr, &forced);
    } else {
      r = rollout(tape, net, local, global, cfg, ctx, RolloutMode::sample, &rng, nullptr);
    }
    rewards.push_back(docs_[di].reward(r.order));
    log_probs.push_back(total_log_prob(tape, r.log_terms));
  }
  const double mean_reward = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());

  if (const auto loss = policy_gradient_loss(log_probs, rewards)) {
    if (!std::isfinite(loss->scalar())) {
      std::ostringstream msg;
      msg << "non-finite loss at step " << s << " on record " << rec.id;
      throw Error(msg.str());
    }
    tape.backward(*loss);
    try {
      nn::adam_step(net.params(), model_.adam);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << e.what() << " at step " << s << " on record " << rec.id;
      throw Error(msg.str());
    }
  } else {
    last_skipped_ = true;
  }
  model_.step = s + 1;
  return mean_reward;
}

nn::Var<float> SelectorTrainer::reinforce_loss(nn::Tape<float>& tape, const SelectorNet<float>& net,
                                               const std::vector<nn::Mat<float>>& sentences,
                                               const std::vector<Episode>& episodes, const SelectorConfig& cfg,
                                               const nn::Context<float>& ctx) {
  if (episodes.empty()) throw Error("reinforce_loss needs episodes");
  const auto local = net.encode_local(tape, sentences);
  const auto global = net.encode_global(tape, local);
  std::vector<Var<float>> log_probs;
  std::vector<double> rewards;
  for (const auto& ep : episodes) {
    const auto r = rollout(tape, net, local, global, cfg, ctx, RolloutMode::forced, nullptr, &ep.extraction_order);
    log_probs.push_back(total_log_prob(tape, r.log_terms));
    rewards.push_back(ep.reward);
  }
  if (auto loss = policy_gradient_loss(log_probs, rewards)) return *loss;
  // Every advantage is zero: the loss is identically zero in the parameters.
  return nn::scale(nn::sum(nn::concat_cols<float>(std::span<const Var<float>>(log_probs))), 0.0f);
}

double validation_rouge_l(const Corpus& corpus, const SelectorModel& model, const EmbeddingTable& embeddings) {
  if (corpus.empty()) return 0.0;
  double total = 0.0;
  for (const auto& rec : corpus) {
    const auto labels = select(rec, model, embeddings);
    std::vector<std::string> picked;
    for (auto i : labels.selected) picked.push_back(rec.doc_sentences[i]);
    total += rouge_texts(join(picked, " "), rec.gold_summary).rougeL.f1;
  }
  return total / static_cast<double>(corpus.size());
}

SelectorModel train_reinforce(const Corpus& train, const EmbeddingTable& embeddings,
                              const std::map<std::string, std::vector<Episode>>& oracle_episodes,
                              const SelectorConfig& cfg, const TrainOptions& options) {
  return continue_training(SelectorModel(cfg), train, embeddings, oracle_episodes, options);
}

SelectorModel continue_training(SelectorModel model, const Corpus& train, const EmbeddingTable& embeddings,
                                const std::map<std::string, std::vector<Episode>>& oracle_episodes,
                                const TrainOptions& options) {
  SelectorTrainer trainer(train, embeddings, oracle_episodes, model);
  const std::uint64_t n = trainer.updates_per_epoch();
  const std::uint64_t total = n * model.config.epochs;
  std::optional<SelectorModel> best;
  double best_score = -1.0;
  EpochStats stats;
  stats.epoch = model.step / n;
  std::uint64_t in_epoch = 0;
  while (model.step < total) {
    stats.mean_reward += trainer.update();
    ++in_epoch;
    if (trainer.last_update_skipped()) ++stats.skipped_updates;
    if (model.step % n != 0) continue;
    stats.mean_reward /= static_cast<double>(in_epoch);
    if (options.validation != nullptr) {
      stats.validation_rouge_l = validation_rouge_l(*options.validation, model, embeddings);
      if (stats.validation_rouge_l > best_score) {
        best_score = stats.validation_rouge_l;
        best = model.clone();
      }
    }
    if (options.on_epoch) options.on_epoch(stats);
    stats = EpochStats{};
    stats.epoch = model.step / n;
    in_epoch = 0;
  }
  if (best) return std::move(*best);
  return model;
}

}  // namespace plansum
