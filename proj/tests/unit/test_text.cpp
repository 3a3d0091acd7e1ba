#include <doctest.h>

#include <fstream>
#include <string>
#include <vector>

#include "plansum/rng.hpp"
#include "plansum/text.hpp"

using namespace plansum;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

TEST_CASE("segment_sentences splits plain sentences") {
  const auto s = segment_sentences("The court ruled. The case closed.");
  REQUIRE(s.size() == 2);
  CHECK(s[0] == "The court ruled.");
  CHECK(s[1] == "The case closed.");
}

TEST_CASE("segment_sentences guards abbreviations") {
  CHECK(segment_sentences("Kimbrell's, Inc. settled.").size() == 1);
  CHECK(segment_sentences("See Smith v. Jones. It was decided.").size() == 2);
  CHECK(segment_sentences("Filed in the U.S. District Court. Closed.").size() == 2);
  CHECK(segment_sentences("Judge J. Smith presided. He ruled.").size() == 2);
}

TEST_CASE("segment_sentences handles questions, exclamations and closers") {
  const auto s = segment_sentences("Was it filed? Yes! \"It was.\" (Indeed.) Done");
  REQUIRE(s.size() == 5);
  CHECK(s[2] == "\"It was.\"");
  CHECK(s[3] == "(Indeed.)");
  CHECK(s[4] == "Done");
}

TEST_CASE("segment_sentences does not split before a lowercase word") {
  CHECK(segment_sentences("The amount was 5 mi. and the rest followed.").size() == 1);
}

TEST_CASE("segment_sentences on whitespace-only input is empty") {
  CHECK(segment_sentences("").empty());
  CHECK(segment_sentences(" \t\n ").empty());
}

TEST_CASE("segment_sentences reproduces the 50-sentence fixture") {
  const auto expected = read_lines(std::string(PLANSUM_TEST_DATA) + "/segmentation_50.txt");
  REQUIRE(expected.size() == 50);
  // joined with mixed whitespace, as running text would be
  std::string text;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) text += (i % 3 == 0) ? "\n" : (i % 3 == 1 ? "  " : " ");
    text += expected[i];
  }
  const auto got = segment_sentences(text);
  CHECK(got.size() == 50);
  for (std::size_t i = 0; i < std::min(got.size(), expected.size()); ++i) {
    CHECK_MESSAGE(got[i] == expected[i], "sentence " << i);
  }
}

TEST_CASE("segment_sentences preserves the word sequence") {
  Rng rng(11);
  const std::vector<std::string> words = {"The", "court", "v.", "Inc.", "ruled.", "it", "No.", "5",
                                          "closed?", "\"yes.\"", "U.S.", "J.", "(see", "Id.)", "done!"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> seq;
    const auto n = 1 + rng.below(20);
    for (std::uint64_t i = 0; i < n; ++i) seq.push_back(words[rng.below(words.size())]);
    const auto text = join(seq, " ");
    CHECK(join(segment_sentences(text), " ") == text);
  }
}

TEST_CASE("tokenize examples") {
  CHECK(tokenize("The lawsuit was filed.", true) ==
        std::vector<std::string>{"the", "lawsuit", "was", "filed", "."});
  CHECK(tokenize("", false).empty());
  CHECK(tokenize("$25,000", false) == std::vector<std::string>{"$", "25,000"});
  CHECK(tokenize("Two third-party nominees", false) ==
        std::vector<std::string>{"Two", "third-party", "nominees"});
  CHECK(tokenize("Kimbrell's, Inc.", false) == std::vector<std::string>{"Kimbrell's", ",", "Inc", "."});
  CHECK(tokenize("(30%)", false) == std::vector<std::string>{"(", "30", "%", ")"});
  CHECK(tokenize("a\xC2\xA0" "b", false) == std::vector<std::string>{"a", "b"});
}

TEST_CASE("tokenize casefolds Latin-1 letters") {
  CHECK(tokenize("\xC3\x89TAT Caf\xC3\xA9", true) == std::vector<std::string>{"\xC3\xA9tat", "caf\xC3\xA9"});
}

TEST_CASE("tokenize is idempotent on its own output") {
  Rng rng(5);
  const std::string alphabet = "abcXY12 .,'-/:&$%()!?\"";
  for (int trial = 0; trial < 1000; ++trial) {
    std::string s;
    const auto n = rng.below(30);
    for (std::uint64_t i = 0; i < n; ++i) s.push_back(alphabet[rng.below(alphabet.size())]);
    for (bool fold : {false, true}) {
      const auto once = tokenize(s, fold);
      CHECK_MESSAGE(tokenize(join(once, " "), fold) == once, "input: " << s);
    }
  }
}
