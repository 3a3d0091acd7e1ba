#include "plansum/metrics.hpp"

#include "plansum/error.hpp"
#include "plansum/stemmer.hpp"
#include "plansum/text.hpp"

namespace plansum {

RougeScore RougeScore::from_counts(double matches, std::size_t candidate_total,
                                   std::size_t reference_total) {
  RougeScore s;
  s.precision = candidate_total ? matches / static_cast<double>(candidate_total) : 0.0;
  s.recall = reference_total ? matches / static_cast<double>(reference_total) : 0.0;
  const double denom = s.precision + s.recall;
  s.f1 = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
  return s;
}

RougeScore rouge_n(const TokenList& candidate, const TokenList& reference, std::size_t n) {
  if (n == 0) throw Error("rouge_n requires n >= 1");
  return detail::rouge_n<std::string>(candidate, reference, n);
}

RougeScore rouge_l(const TokenList& candidate, const TokenList& reference) {
  return detail::rouge_l<std::string>(candidate, reference);
}

std::size_t lcs_length(const TokenList& a, const TokenList& b) {
  return detail::lcs_length<std::string>(a, b);
}

TokenList rouge_tokens(std::string_view text, const RougeConfig& cfg) {
  auto tokens = tokenize(text, cfg.casefold);
  if (cfg.stem) {
    for (auto& t : tokens) t = porter_stem(t);
  }
  return tokens;
}

RougeTriple rouge_texts(std::string_view candidate, std::string_view reference, const RougeConfig& cfg) {
  const auto c = rouge_tokens(candidate, cfg);
  const auto r = rouge_tokens(reference, cfg);
  return detail::rouge_all<std::string>(c, r);
}

double mean_rouge_f1(std::string_view candidate, std::string_view reference, const RougeConfig& cfg) {
  return rouge_texts(candidate, reference, cfg).mean_f1();
}

nlohmann::json to_json(const RougeScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

nlohmann::json to_json(const RougeTriple& t) {
  return {{"rouge1", to_json(t.rouge1)}, {"rouge2", to_json(t.rouge2)}, {"rougeL", to_json(t.rougeL)}};
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["config"] = {{"casefold", config.casefold}, {"stem", config.stem}};
  j["count"] = records.size();
  j["mean"] = plansum::to_json(mean);
  j["records"] = nlohmann::json::array();
  for (const auto& r : records) {
    auto rec = plansum::to_json(r.scores);
    rec["id"] = r.id;
    j["records"].push_back(std::move(rec));
  }
  return j;
}

EvalReport evaluate_corpus(const std::map<std::string, std::string>& candidates,
                           const std::map<std::string, std::string>& references, const RougeConfig& cfg) {
  EvalReport report;
  report.config = cfg;
  for (const auto& [id, text] : candidates) {
    const auto ref = references.find(id);
    if (ref == references.end()) throw Error("candidate " + id + " has no reference summary");
    report.records.push_back({id, rouge_texts(text, ref->second, cfg)});
  }
  if (!report.records.empty()) {
    const auto n = static_cast<double>(report.records.size());
    auto accumulate = [&](auto member) {
      RougeScore m;
      for (const auto& r : report.records) {
        const RougeScore& s = r.scores.*member;
        m.precision += s.precision;
        m.recall += s.recall;
        m.f1 += s.f1;
      }
      m.precision /= n;
      m.recall /= n;
      m.f1 /= n;
      return m;
    };
    report.mean.rouge1 = accumulate(&RougeTriple::rouge1);
    report.mean.rouge2 = accumulate(&RougeTriple::rouge2);
    report.mean.rougeL = accumulate(&RougeTriple::rougeL);
  }
  return report;
}

}  // namespace plansum
