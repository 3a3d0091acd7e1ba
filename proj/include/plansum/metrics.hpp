#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace plansum {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static RougeScore from_counts(double matches, std::size_t candidate_total,
                                std::size_t reference_total);
};

struct RougeTriple {
  RougeScore rouge1;
  RougeScore rouge2;
  RougeScore rougeL;

  double mean_f1() const { return (rouge1.f1 + rouge2.f1 + rougeL.f1) / 3.0; }
};

namespace detail {

// Clipped n-gram matches via sorted n-gram start positions; exact for any
// element type with operator<.
template <class T>
std::size_t ngram_matches(std::span<const T> cand, std::span<const T> ref, std::size_t n) {
  auto starts = [n](std::span<const T> seq) {
    std::vector<std::size_t> idx;
    if (seq.size() >= n) {
      idx.resize(seq.size() - n + 1);
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(seq.begin() + a, seq.begin() + a + n, seq.begin() + b,
                                          seq.begin() + b + n);
    });
    return idx;
  };
  const auto ca = starts(cand);
  const auto ra = starts(ref);
  auto cmp = [n](std::span<const T> x, std::size_t i, std::span<const T> y, std::size_t j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (x[i + k] < y[j + k]) return -1;
      if (y[j + k] < x[i + k]) return 1;
    }
    return 0;
  };
  std::size_t matches = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ca.size() && j < ra.size()) {
    const int c = cmp(cand, ca[i], ref, ra[j]);
    if (c < 0) {
      ++i;
    } else if (c > 0) {
      ++j;
    } else {
      ++matches;
      ++i;
      ++j;
    }
  }
  return matches;
}

template <class T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

template <class T>
RougeScore rouge_n(std::span<const T> cand, std::span<const T> ref, std::size_t n) {
  const std::size_t cand_total = cand.size() >= n ? cand.size() - n + 1 : 0;
  const std::size_t ref_total = ref.size() >= n ? ref.size() - n + 1 : 0;
  return RougeScore::from_counts(static_cast<double>(ngram_matches(cand, ref, n)), cand_total, ref_total);
}

template <class T>
RougeScore rouge_l(std::span<const T> cand, std::span<const T> ref) {
  return RougeScore::from_counts(static_cast<double>(lcs_length(cand, ref)), cand.size(), ref.size());
}

template <class T>
RougeTriple rouge_all(std::span<const T> cand, std::span<const T> ref) {
  return {rouge_n(cand, ref, 1), rouge_n(cand, ref, 2), rouge_l(cand, ref)};
}

}  // namespace detail

using TokenList = std::vector<std::string>;

/// Clipped n-gram overlap. Throws plansum::Error when n == 0.
RougeScore rouge_n(const TokenList& candidate, const TokenList& reference, std::size_t n);
/// Longest-common-subsequence overlap.
RougeScore rouge_l(const TokenList& candidate, const TokenList& reference);
std::size_t lcs_length(const TokenList& a, const TokenList& b);

struct RougeConfig {
  bool casefold = true;
  bool stem = false;
  bool operator==(const RougeConfig&) const = default;
};

TokenList rouge_tokens(std::string_view text, const RougeConfig& cfg = {});
RougeTriple rouge_texts(std::string_view candidate, std::string_view reference,
                        const RougeConfig& cfg = {});

/// Terminal episode reward: mean of the ROUGE-1, ROUGE-2 and ROUGE-L F1 scores.
double mean_rouge_f1(std::string_view candidate, std::string_view reference,
                     const RougeConfig& cfg = {});

struct RecordScores {
  std::string id;
  RougeTriple scores;
};

struct EvalReport {
  std::vector<RecordScores> records;  // sorted by id
  RougeTriple mean;
  RougeConfig config;

  std::size_t count() const { return records.size(); }
  nlohmann::json to_json() const;
};

/// Scores every candidate against the reference with the same id. Throws if a
/// candidate id has no reference.
EvalReport evaluate_corpus(const std::map<std::string, std::string>& candidates,
                           const std::map<std::string, std::string>& references,
                           const RougeConfig& cfg = {});

nlohmann::json to_json(const RougeScore& s);
nlohmann::json to_json(const RougeTriple& t);

}  // namespace plansum
