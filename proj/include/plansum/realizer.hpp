#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plansum/planner.hpp"

namespace plansum {

struct RealizerConfig {
  double min_match = 0.3;
  bool drop_unplanned = true;

  bool operator==(const RealizerConfig&) const = default;
};

struct TupleMatch {
  std::optional<std::size_t> sentence;  // index into the selection
  double score = 0.0;                   // best coverage over the selection
};

struct Alignment {
  std::vector<TupleMatch> matches;  // one per plan tuple
  std::vector<std::size_t> unmatched_tuples;
  std::vector<std::size_t> unmatched_sentences;
};

/// Share of the tuple's tokens (clipped counts, casefolded) found in the
/// sentence. 1.0 whenever every tuple token occurs in the sentence.
double tuple_coverage(const EventTuple& tuple, const std::string& sentence);

/// Each tuple goes to the sentence with the highest coverage when that is at
/// least `min_match`; ties go to the higher token F1, then the earlier sentence.
Alignment align(const std::vector<std::string>& selected, const Plan& plan, double min_match = 0.3);

struct RealizedSummary {
  std::string id;
  std::vector<std::string> sentences;
  std::vector<std::size_t> provenance;  // index into the selection per output sentence
  std::vector<std::string> warnings;

  std::string text() const;
};

/// Matched sentences in the order of their first matching tuple; unmatched
/// sentences are dropped, or appended in selection order when
/// drop_unplanned is false.
RealizedSummary realize(const std::string& id, const std::vector<std::string>& selected, const Plan& plan,
                        const RealizerConfig& cfg = {});

nlohmann::json to_json(const RealizedSummary& summary);
RealizedSummary realized_from_json(const nlohmann::json& j);

}  // namespace plansum
