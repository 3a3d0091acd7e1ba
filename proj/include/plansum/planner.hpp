#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "plansum/corpus.hpp"
#include "plansum/metrics.hpp"

namespace plansum {

struct EventTuple {
  std::string subject;
  std::string predicate;
  std::string object;
  std::size_t sentence = 0;  // source sentence ordinal

  bool operator==(const EventTuple&) const = default;
};

/// Event tuples in source-sentence order.
struct Plan {
  std::vector<EventTuple> tuples;

  bool empty() const { return tuples.empty(); }
  std::size_t size() const { return tuples.size(); }
  bool operator==(const Plan&) const = default;
};

/// One entity chain per sentence.
struct EntityPlan {
  std::vector<std::vector<std::string>> chains;
  bool operator==(const EntityPlan&) const = default;
};

struct PlannerOptions {
  bool resolve_pronouns = false;
  // Drops auxiliaries from predicates and every determiner from arguments, so
  // "The lawsuit was filed" yields (lawsuit, filed, ...).
  bool normalize = false;

  bool operator==(const PlannerOptions&) const = default;
};

/// Rule-based subject-predicate-object extraction from one dependency parse.
/// Tuples follow predicate position; verbless sentences yield nothing.
std::vector<EventTuple> extract_svo(const ParsedSentence& parsed, std::size_t sentence_ordinal = 0,
                                    const PlannerOptions& options = {});

bool is_subject_pronoun(const std::string& word);

/// Replaces he/she/it/they subjects with the most recent earlier non-pronoun
/// subject. Identity when `enabled` is false.
std::vector<std::vector<EventTuple>> resolve_pronouns(std::vector<std::vector<EventTuple>> tuples, bool enabled);

/// Extraction over consecutive sentences, pronoun resolution, concatenation.
/// Ordinals are positions within `parses`.
Plan build_plan(const std::vector<ParsedSentence>& parses, const PlannerOptions& options = {});

/// Gold plan from the reference summary parses.
Plan build_gold_plan(const std::vector<ParsedSentence>& summary_parses, const PlannerOptions& options = {});

/// Plan over the selected document sentences (document order).
Plan generate_plan(const std::vector<ParsedSentence>& selected_parses, const PlannerOptions& options = {});

/// Maximal proper-noun and number runs per sentence; "of" and possessive
/// markers join two runs, a currency symbol attaches to the number after it.
EntityPlan extract_entity_chain(const std::vector<ParsedSentence>& parses);

/// ROUGE-1/2/L between the two linearized plans, separators included.
RougeTriple eval_plan(const Plan& generated, const Plan& gold);

nlohmann::json to_json(const EventTuple& t);
EventTuple event_tuple_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Plan& plan);
Plan plan_from_json(const nlohmann::json& j);

}  // namespace plansum
