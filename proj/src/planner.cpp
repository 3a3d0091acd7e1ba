#include "plansum/planner.hpp"

#include <algorithm>
#include <set>

#include "plansum/plan_format.hpp"
#include "plansum/text.hpp"

namespace plansum {

namespace {

bool starts_with(const std::string& s, std::string_view prefix) { return s.rfind(prefix, 0) == 0; }

bool is_article(const std::string& form) {
  const auto f = casefold(form);
  return f == "a" || f == "an" || f == "the";
}

bool is_negation(const ParsedToken& t) {
  const auto f = casefold(t.form);
  if (t.deprel == "neg" || t.deprel == "advmod:neg") return true;
  return t.deprel == "advmod" && (f == "not" || f == "n't" || f == "never");
}

bool is_relative_pronoun(const ParsedToken& t) {
  const auto f = casefold(t.form);
  return f == "who" || f == "which" || f == "that" || f == "whom";
}

// Dependents never rendered inside an argument.
const std::set<std::string> kArgumentExcluded = {
    "punct", "conj", "cc", "appos", "acl", "acl:relcl", "advcl", "parataxis", "dep", "cop", "aux", "aux:pass",
    "mark", "nsubj", "nsubj:pass", "csubj", "csubj:pass", "discourse", "vocative", "reparandum", "orphan", "list"};

// Dependents kept in the compact rendering of a subject.
const std::set<std::string> kSubjectCore = {"compound", "amod", "nummod", "det", "flat", "flat:name",
                                            "nmod:poss", "fixed", "case", "det:poss", "compound:prt"};

class Extractor {
 public:
  Extractor(const ParsedSentence& s, const PlannerOptions& o) : s_(s), opt_(o) {
    for (std::size_t i = 0; i < s.size(); ++i) kids_.push_back(s.children(i));
  }

  const std::vector<std::size_t>& kids(std::size_t i) const { return kids_[i]; }
  const ParsedToken& tok(std::size_t i) const { return s_.tokens[i]; }

  std::optional<std::size_t> child(std::size_t head, std::initializer_list<std::string_view> rels) const {
    for (auto rel : rels) {
      for (auto k : kids_[head]) {
        if (tok(k).deprel == rel) return k;
      }
    }
    return std::nullopt;
  }

  std::optional<std::size_t> child_prefix(std::size_t head, std::string_view prefix, std::set<std::string> skip = {}) const {
    for (auto k : kids_[head]) {
      if (starts_with(tok(k).deprel, prefix) && !skip.contains(tok(k).deprel)) return k;
    }
    return std::nullopt;
  }

  bool drop_determiner(std::size_t i) const {
    const auto& t = tok(i);
    if (t.deprel != "det") return false;
    return opt_.normalize || is_article(t.form);
  }

  void collect(std::size_t i, bool core, std::vector<std::size_t>& out) const {
    out.push_back(i);
    for (auto k : kids_[i]) {
      const auto& rel = tok(k).deprel;
      if (drop_determiner(k)) continue;
      if (core ? !kSubjectCore.contains(rel) : kArgumentExcluded.contains(rel)) continue;
      collect(k, core, out);
    }
  }

  /// Argument text; `drop_case` removes the head's own preposition.
  std::string argument(std::size_t head, bool core, bool drop_case) const {
    std::vector<std::size_t> idx;
    idx.push_back(head);
    for (auto k : kids_[head]) {
      const auto& rel = tok(k).deprel;
      if (drop_determiner(k)) continue;
      if (drop_case && rel == "case") continue;
      if (core ? !kSubjectCore.contains(rel) : kArgumentExcluded.contains(rel)) continue;
      collect(k, core, idx);
    }
    return render(std::move(idx));
  }

  std::string render(std::vector<std::size_t> idx) const {
    std::sort(idx.begin(), idx.end());
    std::string out;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (j > 0) {
        const bool glued = idx[j] == idx[j - 1] + 1 && !tok(idx[j - 1]).space_after;
        if (!glued) out += ' ';
      }
      out += tok(idx[j]).form;
    }
    return out;
  }

  bool is_copular(std::size_t i) const { return child(i, {"cop"}).has_value(); }
  bool is_anchor(std::size_t i) const {
    if (is_copular(i)) return true;
    return tok(i).upos == "VERB" && tok(i).deprel != "cop";
  }
  bool is_passive(std::size_t v) const { return child(v, {"aux:pass", "nsubj:pass", "csubj:pass"}).has_value(); }

  std::string predicate(std::size_t v) const {
    std::vector<std::size_t> idx;
    const auto cop = child(v, {"cop"});
    idx.push_back(cop ? *cop : v);
    for (auto k : kids_[v]) {
      const auto& t = tok(k);
      const bool aux = t.deprel == "aux" || t.deprel == "aux:pass";
      if ((aux && !opt_.normalize) || t.deprel == "compound:prt" || is_negation(t)) idx.push_back(k);
    }
    return render(std::move(idx));
  }

  /// Subject phrase including inheritance from the governing predicate.
  std::string subject(std::size_t v, int depth = 0) const {
    if (const auto subj = child(v, {"nsubj", "nsubj:pass", "csubj", "csubj:pass"})) {
      const auto& rel = tok(v).deprel;
      if (rel == "acl:relcl" && is_relative_pronoun(tok(*subj)) && tok(v).head != kRootHead) {
        return argument(static_cast<std::size_t>(tok(v).head), true, false);
      }
      return argument(*subj, !starts_with(tok(*subj).deprel, "csubj"), false);
    }
    if (tok(v).head == kRootHead || depth > 8) return {};
    const auto gov = static_cast<std::size_t>(tok(v).head);
    const auto& rel = tok(v).deprel;
    if (rel == "conj" || rel == "advcl") return is_anchor(gov) ? subject(gov, depth + 1) : std::string{};
    if (rel == "xcomp") {
      if (const auto obj = child(gov, {"obj", "iobj"})) return argument(*obj, true, false);
      return is_anchor(gov) ? subject(gov, depth + 1) : std::string{};
    }
    if (rel == "acl" || rel == "acl:relcl") return argument(gov, true, false);
    return {};
  }

  std::string object(std::size_t v) const {
    if (const auto o = child(v, {"obj", "iobj"})) return argument(*o, false, false);
    if (is_copular(v)) return argument(v, false, true);
    if (is_passive(v)) {
      if (const auto agent = child(v, {"obl:agent"})) return argument(*agent, false, true);
    }
    if (const auto obl = child_prefix(v, "obl", {"obl:agent"})) return argument(*obl, false, true);
    if (const auto agent = child(v, {"obl:agent"})) return argument(*agent, false, true);
    if (const auto comp = child(v, {"ccomp", "xcomp"})) {
      std::vector<std::size_t> idx;
      collect(*comp, false, idx);
      // A clausal complement keeps its own subject and auxiliaries.
      for (auto k : kids_[*comp]) {
        const auto& rel = tok(k).deprel;
        if (rel == "nsubj" || rel == "nsubj:pass" || rel == "aux" || rel == "aux:pass" || rel == "mark") {
          if (rel == "mark" && starts_with(casefold(tok(k).form), "that")) continue;
          collect(k, false, idx);
        }
      }
      return render(std::move(idx));
    }
    return {};
  }

 private:
  const ParsedSentence& s_;
  const PlannerOptions& opt_;
  std::vector<std::vector<std::size_t>> kids_;
};

}  // namespace

std::vector<EventTuple> extract_svo(const ParsedSentence& parsed, std::size_t sentence_ordinal,
                                    const PlannerOptions& options) {
  std::vector<EventTuple> out;
  if (parsed.tokens.empty()) return out;
  const Extractor ex(parsed, options);
  for (std::size_t v = 0; v < parsed.size(); ++v) {
    if (!ex.is_anchor(v)) continue;
    EventTuple t{ex.subject(v), ex.predicate(v), ex.object(v), sentence_ordinal};
    if (t.subject.empty() && t.object.empty()) continue;
    out.push_back(std::move(t));
  }
  return out;
}

bool is_subject_pronoun(const std::string& word) {
  const auto f = casefold(word);
  return f == "he" || f == "she" || f == "it" || f == "they";
}

std::vector<std::vector<EventTuple>> resolve_pronouns(std::vector<std::vector<EventTuple>> tuples, bool enabled) {
  if (!enabled) return tuples;
  std::string antecedent;
  for (auto& sentence : tuples) {
    for (auto& t : sentence) {
      if (is_subject_pronoun(t.subject)) {
        if (!antecedent.empty()) t.subject = antecedent;
      } else if (!t.subject.empty()) {
        antecedent = t.subject;
      }
    }
  }
  return tuples;
}

Plan build_plan(const std::vector<ParsedSentence>& parses, const PlannerOptions& options) {
  std::vector<std::vector<EventTuple>> per_sentence;
  for (std::size_t i = 0; i < parses.size(); ++i) per_sentence.push_back(extract_svo(parses[i], i, options));
  Plan plan;
  for (auto& sentence : resolve_pronouns(std::move(per_sentence), options.resolve_pronouns)) {
    for (auto& t : sentence) plan.tuples.push_back(std::move(t));
  }
  return plan;
}

Plan build_gold_plan(const std::vector<ParsedSentence>& summary_parses, const PlannerOptions& options) {
  return build_plan(summary_parses, options);
}

Plan generate_plan(const std::vector<ParsedSentence>& selected_parses, const PlannerOptions& options) {
  return build_plan(selected_parses, options);
}

EntityPlan extract_entity_chain(const std::vector<ParsedSentence>& parses) {
  EntityPlan plan;
  for (const auto& s : parses) {
    const auto n = s.size();
    auto is_entity = [&](std::size_t i) { return s.tokens[i].upos == "PROPN" || s.tokens[i].upos == "NUM"; };
    auto is_bridge = [&](std::size_t i) {
      const auto f = casefold(s.tokens[i].form);
      return f == "of" || f == "'s" || f == "'" || f == "’s";
    };
    auto is_currency = [&](std::size_t i) { return s.tokens[i].upos == "SYM" && i + 1 < n && s.tokens[i + 1].upos == "NUM"; };
    std::vector<std::string> chain;
    std::size_t i = 0;
    while (i < n) {
      if (!is_entity(i) && !is_currency(i)) {
        ++i;
        continue;
      }
      std::vector<std::size_t> run{i};
      std::size_t j = i + 1;
      while (j < n) {
        if (is_entity(j)) {
          run.push_back(j++);
        } else if (is_bridge(j) && j + 1 < n && (is_entity(j + 1) || is_currency(j + 1))) {
          run.push_back(j);
          run.push_back(j + 1);
          j += 2;
        } else if (is_bridge(j) && casefold(s.tokens[j].form) != "of") {
          run.push_back(j++);  // trailing possessive: "Kimbrell 's"
        } else {
          break;
        }
      }
      std::string text;
      for (std::size_t k = 0; k < run.size(); ++k) {
        if (k > 0 && s.tokens[run[k - 1]].space_after) text += ' ';
        text += s.tokens[run[k]].form;
      }
      if (std::find(chain.begin(), chain.end(), text) == chain.end()) chain.push_back(std::move(text));
      i = j;
    }
    plan.chains.push_back(std::move(chain));
  }
  return plan;
}

RougeTriple eval_plan(const Plan& generated, const Plan& gold) {
  return rouge_texts(linearize_plan(generated), linearize_plan(gold));
}

nlohmann::json to_json(const EventTuple& t) {
  return {{"subject", t.subject}, {"predicate", t.predicate}, {"object", t.object}, {"sentence", t.sentence}};
}

EventTuple event_tuple_from_json(const nlohmann::json& j) {
  return {j.at("subject").get<std::string>(), j.at("predicate").get<std::string>(),
          j.at("object").get<std::string>(), j.value("sentence", std::size_t{0})};
}

nlohmann::json to_json(const Plan& plan) {
  auto arr = nlohmann::json::array();
  for (const auto& t : plan.tuples) arr.push_back(to_json(t));
  return arr;
}

Plan plan_from_json(const nlohmann::json& j) {
  Plan plan;
  for (const auto& t : j) plan.tuples.push_back(event_tuple_from_json(t));
  return plan;
}

}  // namespace plansum
