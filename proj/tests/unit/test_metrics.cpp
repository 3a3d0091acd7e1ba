#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "oracles.hpp"
#include "plansum/error.hpp"
#include "plansum/metrics.hpp"
#include "plansum/rng.hpp"
#include "plansum/stemmer.hpp"
#include "plansum/text.hpp"
#include "rouge_pairs.hpp"

using namespace plansum;

namespace {

TokenList random_tokens(Rng& rng, std::size_t max_len, std::size_t vocab) {
  TokenList t;
  const auto n = rng.below(max_len + 1);
  for (std::uint64_t i = 0; i < n; ++i) t.push_back(std::string(1, static_cast<char>('a' + rng.below(vocab))));
  return t;
}

void check_against_oracle(const TokenList& c, const TokenList& r) {
  for (std::size_t n : {1, 2}) {
    const auto got = rouge_n(c, r, n);
    const auto want = oracle::rouge_n(c, r, n);
    CHECK(got.precision == doctest::Approx(want.p).epsilon(1e-12));
    CHECK(got.recall == doctest::Approx(want.r).epsilon(1e-12));
    CHECK(got.f1 == doctest::Approx(want.f).epsilon(1e-12));
  }
  const auto got = rouge_l(c, r);
  const auto want = oracle::rouge_l(c, r);
  CHECK(got.precision == doctest::Approx(want.p).epsilon(1e-12));
  CHECK(got.recall == doctest::Approx(want.r).epsilon(1e-12));
  CHECK(got.f1 == doctest::Approx(want.f).epsilon(1e-12));
}

}  // namespace

TEST_CASE("rouge_n examples") {
  const TokenList a = {"the", "cat", "sat"};
  const auto same = rouge_n(a, a, 1);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.f1 == 1.0);

  const auto partial = rouge_n({"the", "cat"}, a, 1);
  CHECK(partial.precision == 1.0);
  CHECK(partial.recall == doctest::Approx(2.0 / 3.0));
  CHECK(partial.f1 == doctest::Approx(0.8));

  const auto disjoint = rouge_n({"a", "b"}, {"c", "d"}, 2);
  CHECK(disjoint.f1 == 0.0);
  CHECK_THROWS_AS(rouge_n(a, a, 0), Error);
}

TEST_CASE("rouge_l examples") {
  const auto s = rouge_l({"a", "c", "b", "d"}, {"a", "b", "c", "d"});
  CHECK(lcs_length({"a", "c", "b", "d"}, {"a", "b", "c", "d"}) == 3);
  CHECK(s.precision == 0.75);
  CHECK(s.recall == 0.75);
  CHECK(s.f1 == doctest::Approx(0.75));
  CHECK(rouge_l({}, {"a"}).f1 == 0.0);
  CHECK(rouge_l({"a", "b"}, {"a", "b"}).f1 == 1.0);
}

TEST_CASE("mean_rouge_f1 matches the component oracle") {
  CHECK(mean_rouge_f1("The cat sat.", "the cat sat .") == doctest::Approx(1.0));
  CHECK(mean_rouge_f1("alpha beta", "gamma delta") == 0.0);
  const auto c = tokenize("the cat sat", true);
  const auto r = tokenize("the cat", true);
  const double want =
      (oracle::rouge_n(c, r, 1).f + oracle::rouge_n(c, r, 2).f + oracle::rouge_l(c, r).f) / 3.0;
  CHECK(mean_rouge_f1("the cat sat", "the cat") == doctest::Approx(want).epsilon(1e-12));
  CHECK(oracle::rouge_n(c, r, 1).f == doctest::Approx(0.8));
}

TEST_CASE("hand pairs match the brute-force oracle") {
  for (const auto& [c, r] : fixtures::rouge_hand_pairs()) {
    CAPTURE(c);
    CAPTURE(r);
    check_against_oracle(split_whitespace(c), split_whitespace(r));
  }
}

TEST_CASE("random pairs match the brute-force oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto c = random_tokens(rng, 12, 1 + rng.below(6));
    const auto r = random_tokens(rng, 12, 1 + rng.below(6));
    check_against_oracle(c, r);
    CHECK(lcs_length(c, r) == oracle::lcs_exhaustive(c, r));
  }
}

TEST_CASE("scores are symmetric in F1 and bounded") {
  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_tokens(rng, 15, 5);
    const auto b = random_tokens(rng, 15, 5);
    for (std::size_t n : {1, 2, 3}) {
      const auto ab = rouge_n(a, b, n);
      const auto ba = rouge_n(b, a, n);
      CHECK(ab.f1 == doctest::Approx(ba.f1).epsilon(1e-12));
      CHECK(ab.precision == doctest::Approx(ba.recall).epsilon(1e-12));
      for (double x : {ab.precision, ab.recall, ab.f1}) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
      }
    }
    const auto lab = rouge_l(a, b);
    const auto lba = rouge_l(b, a);
    CHECK(lab.f1 == doctest::Approx(lba.f1).epsilon(1e-12));
    CHECK(lab.precision == doctest::Approx(lba.recall).epsilon(1e-12));
  }
}

TEST_CASE("noise appended to a candidate keeps the clean prefix's recall") {
  Rng rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto ref = random_tokens(rng, 12, 6);
    auto cand = ref;
    const auto noise = random_tokens(rng, 12, 26);
    cand.insert(cand.end(), noise.begin(), noise.end());
    for (std::size_t n : {1, 2}) {
      const auto s = rouge_n(cand, ref, n);
      CHECK(s.f1 <= 1.0);
      CHECK(s.recall >= rouge_n(ref, ref, n).recall - 1e-12);
    }
  }
}

TEST_CASE("reward is the mean of the three F1 components") {
  Rng rng(5);
  const std::vector<std::string> words = {"the", "court", "ruled", "case", "filed", ".", "a"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string c, r;
    for (int i = 0; i < 8; ++i) c += words[rng.below(words.size())] + " ";
    for (int i = 0; i < 8; ++i) r += words[rng.below(words.size())] + " ";
    const auto t = rouge_texts(c, r);
    CHECK(std::abs(mean_rouge_f1(c, r) - (t.rouge1.f1 + t.rouge2.f1 + t.rougeL.f1) / 3.0) <= 1e-12);
  }
}

TEST_CASE("porter_stem reference pairs") {
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"caresses", "caress"}, {"ponies", "poni"},         {"relational", "relat"},
      {"generalization", "gener"}, {"hopping", "hop"},   {"filing", "file"},
      {"happy", "happi"},     {"controll", "control"},    {"rate", "rate"},
      {"cease", "ceas"},      {"agreed", "agre"},         {"conditional", "condit"},
      {"digitizer", "digit"}, {"hopeful", "hope"},        {"sensitivity", "sensit"},
      {"adjustment", "adjust"}, {"is", "is"},             {"25,000", "25,000"}};
  for (const auto& [w, s] : pairs) CHECK_MESSAGE(porter_stem(w) == s, w);
}

TEST_CASE("stemming flag merges inflections") {
  RougeConfig stem;
  stem.stem = true;
  CHECK(rouge_texts("filing claims", "filed claim", stem).rouge1.f1 > rouge_texts("filing claims", "filed claim").rouge1.f1);
  RougeConfig keep_case;
  keep_case.casefold = false;
  CHECK(rouge_texts("The Court", "the court", keep_case).rouge1.f1 == 0.0);
}

TEST_CASE("evaluate_corpus") {
  const auto one = evaluate_corpus({{"a", "the court ruled"}}, {{"a", "the court ruled"}});
  CHECK(one.count() == 1);
  CHECK(one.mean.rouge1.f1 == 1.0);
  CHECK(one.mean.rouge2.f1 == 1.0);
  CHECK(one.mean.rougeL.f1 == 1.0);

  const auto two = evaluate_corpus({{"b", "x y"}, {"a", "p q"}}, {{"a", "p q"}, {"b", "z w"}});
  REQUIRE(two.records.size() == 2);
  CHECK(two.records[0].id == "a");
  CHECK(two.mean.rouge1.f1 == 0.5);

  try {
    evaluate_corpus({{"missing", "x"}}, {{"a", "x"}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }
}

TEST_CASE("mini-corpus evaluation matches the golden report") {
  const std::string dir = std::string(PLANSUM_TEST_DATA) + "/mini";
  auto read_lines = [](const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::vector<nlohmann::json> rows;
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
    }
    return rows;
  };
  std::map<std::string, std::string> candidates, references;
  for (const auto& j : read_lines(dir + "/candidates.jsonl")) candidates[j["id"]] = j["summary"];
  for (const auto& j : read_lines(dir + "/mini_corpus.jsonl")) references[j["id"]] = j["summary"];
  REQUIRE(candidates.size() == 10);
  const auto report = evaluate_corpus(candidates, references).to_json();

  std::ifstream gin(dir + "/golden_report.json");
  const auto golden = nlohmann::json::parse(gin);
  CHECK(report["count"] == golden["count"]);
  CHECK(report["config"] == golden["config"]);
  auto close = [](const nlohmann::json& a, const nlohmann::json& b) {
    for (const char* key : {"rouge1", "rouge2", "rougeL"}) {
      for (const char* field : {"precision", "recall", "f1"}) {
        CHECK_MESSAGE(std::abs(a[key][field].get<double>() - b[key][field].get<double>()) <= 1e-12,
                      key << "." << field);
      }
    }
  };
  close(report["mean"], golden["mean"]);
  REQUIRE(report["records"].size() == golden["records"].size());
  for (std::size_t i = 0; i < golden["records"].size(); ++i) {
    CHECK(report["records"][i]["id"] == golden["records"][i]["id"]);
    close(report["records"][i], golden["records"][i]);
  }
}
