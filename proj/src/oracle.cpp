#include "plansum/oracle.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "plansum/error.hpp"
#include "plansum/rng.hpp"
#include "plansum/text.hpp"

namespace plansum {

double HybridSet::model_fraction() const {
  if (pairs.empty()) return 0.0;
  const auto model = std::count_if(pairs.begin(), pairs.end(),
                                   [](const HybridPair& p) { return p.source == InputSource::model; });
  return static_cast<double>(model) / static_cast<double>(pairs.size());
}

TokenizedDocument::TokenizedDocument(const CaseRecord& record, const RougeConfig& cfg) {
  std::unordered_map<std::string, int> vocab;
  auto intern = [&](const TokenList& toks) {
    std::vector<int> ids;
    ids.reserve(toks.size());
    for (const auto& t : toks) {
      auto [it, _] = vocab.try_emplace(t, static_cast<int>(vocab.size()));
      ids.push_back(it->second);
    }
    return ids;
  };
  summary_ = intern(rouge_tokens(record.gold_summary, cfg));
  for (const auto& s : record.doc_sentences) sentences_.push_back(intern(rouge_tokens(s, cfg)));
}

std::vector<int> TokenizedDocument::concat(std::vector<std::size_t> indices) const {
  std::sort(indices.begin(), indices.end());
  std::vector<int> out;
  for (auto i : indices) out.insert(out.end(), sentences_.at(i).begin(), sentences_.at(i).end());
  return out;
}

RougeScore TokenizedDocument::rouge2(const std::vector<std::size_t>& indices) const {
  const auto c = concat(indices);
  return detail::rouge_n<int>(c, summary_, 2);
}

RougeTriple TokenizedDocument::rouge(const std::vector<std::size_t>& indices) const {
  const auto c = concat(indices);
  return detail::rouge_all<int>(c, summary_);
}

std::vector<GreedyStep> greedy_oracle_path(const CaseRecord& record, std::size_t cap,
                                           const RougeConfig& cfg) {
  if (cap == 0) throw Error("oracle cap must be at least 1");
  if (record.doc_sentences.empty()) throw Error("record " + record.id + " has an empty document");
  const TokenizedDocument doc(record, cfg);
  std::vector<GreedyStep> path;
  std::vector<std::size_t> selected;
  std::vector<bool> used(doc.num_sentences(), false);
  double current = 0.0;
  while (selected.size() < cap) {
    double best = current;
    std::size_t best_idx = doc.num_sentences();
    for (std::size_t i = 0; i < doc.num_sentences(); ++i) {
      if (used[i]) continue;
      selected.push_back(i);
      const double score = doc.rouge2(selected).f1;
      selected.pop_back();
      if (score > best) {
        best = score;
        best_idx = i;
      }
    }
    if (best_idx == doc.num_sentences()) break;
    used[best_idx] = true;
    selected.push_back(best_idx);
    current = best;
    path.push_back({best_idx, best});
  }
  return path;
}

ExtractLabels greedy_oracle_labels(const CaseRecord& record, std::size_t cap, const RougeConfig& cfg) {
  const auto path = greedy_oracle_path(record, cap, cfg);
  ExtractLabels labels;
  labels.id = record.id;
  for (const auto& step : path) labels.selected.push_back(step.index);
  std::sort(labels.selected.begin(), labels.selected.end());
  labels.oracle_score = path.empty() ? 0.0 : path.back().score;
  return labels;
}

namespace {

struct Prefix {
  std::vector<std::size_t> order;
  double rouge2 = 0.0;
  double reward = 0.0;
};

bool better_prefix(const Prefix& a, const Prefix& b) {
  if (a.reward != b.reward) return a.reward > b.reward;
  return a.order < b.order;
}

std::vector<Prefix> beam_search(const TokenizedDocument& doc, std::size_t branching, std::size_t beam,
                                std::size_t cap) {
  std::vector<Prefix> completed;
  std::vector<Prefix> level{Prefix{}};
  while (!level.empty()) {
    std::vector<Prefix> next;
    std::set<std::vector<std::size_t>> seen_sets;
    for (const auto& prefix : level) {
      if (prefix.order.size() >= cap) {
        completed.push_back(prefix);
        continue;
      }
      std::vector<bool> used(doc.num_sentences(), false);
      for (auto i : prefix.order) used[i] = true;
      std::vector<std::pair<double, std::size_t>> gains;
      auto trial = prefix.order;
      for (std::size_t i = 0; i < doc.num_sentences(); ++i) {
        if (used[i]) continue;
        trial.push_back(i);
        const double score = doc.rouge2(trial).f1;
        trial.pop_back();
        if (score > prefix.rouge2) gains.emplace_back(score, i);
      }
      if (gains.empty()) {
        completed.push_back(prefix);
        continue;
      }
      std::stable_sort(gains.begin(), gains.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      gains.resize(std::min(gains.size(), branching));
      for (const auto& [score, idx] : gains) {
        Prefix p;
        p.order = prefix.order;
        p.order.push_back(idx);
        auto key = p.order;
        std::sort(key.begin(), key.end());
        if (!seen_sets.insert(key).second) continue;
        p.rouge2 = score;
        p.reward = doc.reward(p.order);
        next.push_back(std::move(p));
      }
    }
    std::sort(next.begin(), next.end(), better_prefix);
    if (next.size() > beam) next.resize(beam);
    level = std::move(next);
  }
  return completed;
}

}  // namespace

std::vector<Episode> generate_episodes(const CaseRecord& record, std::size_t branching, std::size_t beam,
                                       std::size_t cap, const RougeConfig& cfg) {
  if (branching == 0 || beam == 0) throw Error("branching and beam must be at least 1");
  if (cap == 0) throw Error("episode cap must be at least 1");
  const TokenizedDocument doc(record, cfg);
  std::vector<Prefix> pooled;
  for (std::size_t b = 1; b <= branching; ++b) {
    auto found = beam_search(doc, b, beam, cap);
    pooled.insert(pooled.end(), found.begin(), found.end());
  }
  std::vector<Episode> episodes;
  std::set<std::vector<std::size_t>> seen;
  for (auto& p : pooled) {
    if (!seen.insert(p.order).second) continue;
    episodes.push_back({record.id, p.order, doc.reward(p.order)});
  }
  std::stable_sort(episodes.begin(), episodes.end(), [](const Episode& a, const Episode& b) {
    if (a.reward != b.reward) return a.reward > b.reward;
    return a.extraction_order < b.extraction_order;
  });
  return episodes;
}

HybridSet build_hybrid_set(const std::vector<std::pair<std::string, std::vector<std::size_t>>>& oracle_inputs,
                           const std::map<std::string, std::vector<std::size_t>>& model_inputs,
                           double mix_ratio, std::uint64_t seed) {
  if (!(mix_ratio >= 0.0 && mix_ratio <= 1.0)) throw Error("mix_ratio must lie in [0, 1]");
  HybridSet set;
  set.mix_ratio = mix_ratio;
  Rng rng(derive_seed(seed, "hybrid"));
  for (const auto& [id, oracle] : oracle_inputs) {
    const bool draw_model = rng.uniform() < mix_ratio;
    const auto it = model_inputs.find(id);
    if (draw_model && it != model_inputs.end()) {
      set.pairs.push_back({id, it->second, InputSource::model});
    } else {
      set.pairs.push_back({id, oracle, InputSource::oracle});
    }
  }
  return set;
}

nlohmann::json to_json(const ExtractLabels& labels) {
  return {{"id", labels.id}, {"selected", labels.selected}, {"oracle_score", labels.oracle_score}};
}

ExtractLabels labels_from_json(const nlohmann::json& j) {
  ExtractLabels l;
  l.id = j.at("id").get<std::string>();
  l.selected = j.at("selected").get<std::vector<std::size_t>>();
  l.oracle_score = j.value("oracle_score", 0.0);
  return l;
}

nlohmann::json to_json(const Episode& episode) {
  return {{"id", episode.id}, {"extraction_order", episode.extraction_order}, {"reward", episode.reward}};
}

Episode episode_from_json(const nlohmann::json& j) {
  Episode e;
  e.id = j.at("id").get<std::string>();
  e.extraction_order = j.at("extraction_order").get<std::vector<std::size_t>>();
  e.reward = j.value("reward", 0.0);
  return e;
}

nlohmann::json to_json(const HybridPair& pair) {
  return {{"id", pair.id},
          {"input", pair.input},
          {"source", pair.source == InputSource::model ? "model" : "oracle"}};
}

}  // namespace plansum
