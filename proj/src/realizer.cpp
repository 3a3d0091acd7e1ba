#include "plansum/realizer.hpp"

#include <algorithm>

#include "plansum/metrics.hpp"
#include "plansum/text.hpp"

namespace plansum {

namespace {

TokenList tuple_tokens(const EventTuple& t) {
  return tokenize(t.subject + " " + t.predicate + " " + t.object, true);
}

}  // namespace

double tuple_coverage(const EventTuple& tuple, const std::string& sentence) {
  return rouge_n(tuple_tokens(tuple), tokenize(sentence, true), 1).precision;
}

Alignment align(const std::vector<std::string>& selected, const Plan& plan, double min_match) {
  std::vector<TokenList> sentence_tokens;
  for (const auto& s : selected) sentence_tokens.push_back(tokenize(s, true));
  Alignment out;
  std::vector<bool> used(selected.size(), false);
  for (std::size_t t = 0; t < plan.tuples.size(); ++t) {
    const auto tokens = tuple_tokens(plan.tuples[t]);
    TupleMatch best;
    double best_score = -1.0;
    double best_f1 = -1.0;
    for (std::size_t s = 0; s < selected.size(); ++s) {
      const auto r = rouge_n(tokens, sentence_tokens[s], 1);
      if (r.precision > best_score || (r.precision == best_score && r.f1 > best_f1)) {
        best.sentence = s;
        best_score = r.precision;
        best_f1 = r.f1;
      }
    }
    best.score = std::max(best_score, 0.0);
    if (!best.sentence || best.score <= 0.0 || best.score < min_match) {
      best.sentence.reset();
      out.unmatched_tuples.push_back(t);
    } else {
      used[*best.sentence] = true;
    }
    out.matches.push_back(best);
  }
  for (std::size_t s = 0; s < selected.size(); ++s) {
    if (!used[s]) out.unmatched_sentences.push_back(s);
  }
  return out;
}

std::string RealizedSummary::text() const { return join(sentences, " "); }

RealizedSummary realize(const std::string& id, const std::vector<std::string>& selected, const Plan& plan,
                        const RealizerConfig& cfg) {
  RealizedSummary out;
  out.id = id;
  if (plan.empty() && cfg.drop_unplanned) out.warnings.push_back("empty plan: nothing to realize");
  const auto alignment = align(selected, plan, cfg.min_match);
  std::vector<bool> emitted(selected.size(), false);
  for (const auto& m : alignment.matches) {
    if (!m.sentence || emitted[*m.sentence]) continue;
    emitted[*m.sentence] = true;
    out.provenance.push_back(*m.sentence);
  }
  if (!cfg.drop_unplanned) {
    for (auto s : alignment.unmatched_sentences) out.provenance.push_back(s);
  }
  for (auto s : out.provenance) out.sentences.push_back(selected[s]);
  return out;
}

nlohmann::json to_json(const RealizedSummary& summary) {
  return {{"id", summary.id},
          {"summary", summary.text()},
          {"sentences", summary.sentences},
          {"provenance", summary.provenance},
          {"warnings", summary.warnings}};
}

RealizedSummary realized_from_json(const nlohmann::json& j) {
  RealizedSummary s;
  s.id = j.at("id").get<std::string>();
  s.sentences = j.at("sentences").get<std::vector<std::string>>();
  s.provenance = j.at("provenance").get<std::vector<std::size_t>>();
  s.warnings = j.value("warnings", std::vector<std::string>{});
  return s;
}

}  // namespace plansum
