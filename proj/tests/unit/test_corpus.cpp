#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "plansum/checkpoint.hpp"
#include "plansum/chunking.hpp"
#include "plansum/conllu.hpp"
#include "plansum/corpus.hpp"
#include "plansum/embeddings.hpp"
#include "plansum/error.hpp"
#include "plansum/rng.hpp"

using namespace plansum;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("plansum_test_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

const std::string kTwoSentences =
    "# text = The court ruled.\n"
    "1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_\n"
    "2\tcourt\tcourt\tNOUN\t_\t_\t3\tnsubj\t_\t_\n"
    "3\truled\trule\tVERB\t_\t_\t0\troot\t_\tSpaceAfter=No\n"
    "4\t.\t.\tPUNCT\t_\t_\t3\tpunct\t_\t_\n"
    "\n"
    "1-2\tIt's\t_\t_\t_\t_\t_\t_\t_\t_\n"
    "1\tIt\tit\tPRON\t_\t_\t3\tnsubj\t_\t_\n"
    "2\t's\tbe\tAUX\t_\t_\t3\tcop\t_\t_\n"
    "2.1\tgone\t_\t_\t_\t_\t_\t_\t_\t_\n"
    "3\tclosed\tclosed\tADJ\t_\t_\t0\troot\t_\t_\n"
    "\n";

}  // namespace

TEST_CASE("load_corpus keeps file order and segments string documents") {
  const auto dir = scratch_dir("order");
  write_file(dir / "c.jsonl",
             R"({"id":"b","doc":["One.","Two."],"summary":"One."})" "\n"
             "\n"
             R"({"id":"a","doc":"The court ruled. Smith v. Jones was cited. It closed.","summary":"Closed."})" "\n"
             R"({"id":"c","doc":["Only."],"summary":"Only."})" "\n");
  const auto corpus = load_corpus(dir / "c.jsonl");
  REQUIRE(corpus.size() == 3);
  CHECK(corpus[0].id == "b");
  CHECK(corpus[1].id == "a");
  CHECK(corpus[2].id == "c");
  CHECK(corpus[1].doc_sentences ==
        std::vector<std::string>{"The court ruled.", "Smith v. Jones was cited.", "It closed."});
  CHECK(find_record(corpus, "c") == &corpus[2]);
  CHECK(find_record(corpus, "zz") == nullptr);

  const auto again = load_corpus(dir / "c.jsonl");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(again[i].id == corpus[i].id);
    CHECK(again[i].doc_sentences == corpus[i].doc_sentences);
    CHECK(again[i].gold_summary == corpus[i].gold_summary);
  }
}

TEST_CASE("load_corpus errors name the line or the id") {
  const auto dir = scratch_dir("errors");
  write_file(dir / "missing.jsonl", R"({"id":"a","doc":"X.","summary":"X."})" "\n" R"({"id":"b","doc":"Y."})" "\n");
  CHECK(error_of([&] { load_corpus(dir / "missing.jsonl"); }) == "line 2: missing field summary");

  write_file(dir / "dup.jsonl", R"({"id":"a","doc":"X.","summary":"X."})" "\n" R"({"id":"a","doc":"Y.","summary":"Y."})" "\n");
  CHECK(error_of([&] { load_corpus(dir / "dup.jsonl"); }).find("duplicate id a") != std::string::npos);

  write_file(dir / "bad.jsonl", "{not json\n");
  CHECK(error_of([&] { load_corpus(dir / "bad.jsonl"); }).rfind("line 1:", 0) == 0);
}

TEST_CASE("save_corpus with parses round-trips through relative CoNLL-U paths") {
  const auto dir = scratch_dir("parses");
  std::istringstream in(kTwoSentences);
  const auto parses = read_conllu(in);
  CaseRecord rec;
  rec.id = "r1";
  rec.doc_sentences = {"The court ruled.", "It's closed"};
  rec.gold_summary = "The court ruled.";
  rec.doc_parses = parses;
  rec.summary_parses = std::vector<ParsedSentence>{parses[0]};
  save_corpus({rec}, dir / "out.jsonl", true);
  const auto back = load_corpus(dir / "out.jsonl");
  REQUIRE(back.size() == 1);
  REQUIRE(back[0].doc_parses.has_value());
  REQUIRE(back[0].summary_parses.has_value());
  CHECK(back[0].doc_parses->size() == 2);
  CHECK(back[0].doc_parses->at(0).text() == "The court ruled.");
  CHECK(back[0].summary_parses->size() == 1);
}

TEST_CASE("read_conllu skips multiword ranges and empty nodes") {
  std::istringstream in(kTwoSentences);
  const auto s = read_conllu(in);
  REQUIRE(s.size() == 2);
  CHECK(s[0].size() == 4);
  CHECK(s[0].tokens[1].head == 2);
  CHECK(s[0].tokens[2].head == kRootHead);
  CHECK_FALSE(s[0].tokens[2].space_after);
  REQUIRE(s[1].size() == 3);
  CHECK(s[1].tokens[2].form == "closed");
  CHECK(s[0].children(2) == std::vector<std::size_t>{1, 3});
}

TEST_CASE("read_conllu reports the sentence ordinal") {
  std::string bad = kTwoSentences;
  bad.replace(bad.find("3\tcop"), 1, "x");
  std::istringstream in(bad);
  const auto msg = error_of([&] { read_conllu(in); });
  CHECK(msg.rfind("sentence 2:", 0) == 0);

  std::istringstream short_cols("1\tA\ta\tNOUN\n\n");
  CHECK(error_of([&] { read_conllu(short_cols); }).rfind("sentence 1:", 0) == 0);

  std::istringstream two_roots("1\tA\t_\tNOUN\t_\t_\t0\troot\t_\t_\n2\tB\t_\tNOUN\t_\t_\t0\troot\t_\t_\n\n");
  CHECK(error_of([&] { read_conllu(two_roots); }).find("exactly one root") != std::string::npos);
}

TEST_CASE("write_conllu and read_conllu round-trip") {
  std::istringstream in(kTwoSentences);
  const auto s = read_conllu(in);
  std::stringstream buf;
  write_conllu(buf, s);
  const auto back = read_conllu(buf);
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    REQUIRE(back[i].size() == s[i].size());
    for (std::size_t k = 0; k < s[i].size(); ++k) {
      CHECK(back[i].tokens[k].form == s[i].tokens[k].form);
      CHECK(back[i].tokens[k].head == s[i].tokens[k].head);
      CHECK(back[i].tokens[k].deprel == s[i].tokens[k].deprel);
      CHECK(back[i].tokens[k].space_after == s[i].tokens[k].space_after);
    }
  }
}

TEST_CASE("fixture parse attaches the nominees to the verb") {
  const auto s = load_parses(std::string(PLANSUM_TEST_DATA) + "/svo_fixture.conllu");
  REQUIRE(s.size() == 6);
  const auto& first = s[0];
  CHECK(first.text() == "Two third-party nominees filed this case.");
  CHECK(first.tokens[2].form == "nominees");
  CHECK(first.tokens[2].deprel == "nsubj");
  CHECK(first.tokens[static_cast<std::size_t>(first.tokens[2].head)].form == "filed");
}

TEST_CASE("load_embeddings") {
  const auto dir = scratch_dir("emb");
  write_file(dir / "e.txt", "court 0.5 -1 2\nruled 1e-3 0 0.25\n");
  const auto table = load_embeddings(dir / "e.txt", 3);
  CHECK(table.size() == 2);
  const auto v = table.lookup("court");
  REQUIRE(v.size() == 3);
  CHECK(v[0] == 0.5f);
  CHECK(v[1] == -1.0f);
  CHECK(v[2] == 2.0f);
  CHECK(table.lookup("ruled")[0] == 1e-3f);
  const auto oov = table.lookup("absent");
  REQUIRE(oov.size() == 3);
  CHECK(std::all_of(oov.begin(), oov.end(), [](float x) { return x == 0.0f; }));

  write_file(dir / "bad.txt", "court 0.5 -1 2\nruled 1 2\n");
  CHECK(error_of([&] { load_embeddings(dir / "bad.txt", 3); }).find("'ruled'") != std::string::npos);

  save_embeddings(table, dir / "copy.txt");
  const auto copy = load_embeddings(dir / "copy.txt", 3);
  CHECK(copy.entries() == table.entries());
}

TEST_CASE("chunk_overlapping") {
  SUBCASE("eight tokens, windows of four") {
    const auto c = chunk_overlapping(8, 4, 0.5);
    REQUIRE(c.size() == 3);
    CHECK(c[0].chunk == Span{0, 4});
    CHECK(c[1].chunk == Span{2, 6});
    CHECK(c[2].chunk == Span{4, 8});
    CHECK(c[0].kept == Span{0, 3});
    CHECK(c[1].kept == Span{3, 5});
    CHECK(c[2].kept == Span{5, 8});
  }
  SUBCASE("short input is one chunk") {
    const auto c = chunk_overlapping(3, 8, 0.5);
    REQUIRE(c.size() == 1);
    CHECK(c[0].chunk == Span{0, 3});
    CHECK(c[0].kept == Span{0, 3});
  }
  SUBCASE("1024 tokens in windows of 256") { CHECK(chunk_overlapping(1024, 256, 0.5).size() == 7); }
  SUBCASE("empty input") { CHECK(chunk_overlapping(0, 4, 0.5).empty()); }
  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(chunk_overlapping(10, 5, 0.5), Error);
    CHECK_THROWS_AS(chunk_overlapping(10, 4, 1.0), Error);
  }
}

TEST_CASE("chunk_overlapping kept spans partition the input") {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = rng.below(600);
    const std::size_t size = 4 + 2 * rng.below(64);
    const double overlap = 0.05 + 0.9 * rng.uniform();
    const auto chunks = chunk_overlapping(n, size, overlap);
    std::vector<int> hits(n, 0);
    for (const auto& c : chunks) {
      CHECK(c.chunk.end <= n);
      CHECK(c.chunk.size() <= size);
      CHECK(c.kept.begin >= c.chunk.begin);
      CHECK(c.kept.end <= c.chunk.end);
      for (auto i = c.kept.begin; i < c.kept.end; ++i) ++hits[i];
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  const auto dir = scratch_dir("ckpt");
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Checkpoint ck;
    ck.metadata = {{"kind", "test"}, {"trial", trial}, {"seed", rng.next_u64()}};
    const auto n_blocks = 1 + rng.below(5);
    for (std::uint64_t b = 0; b < n_blocks; ++b) {
      WeightBlock w;
      w.name = "block" + std::to_string(b);
      w.shape = {1 + rng.below(7), 1 + rng.below(7)};
      for (std::size_t i = 0; i < w.shape[0] * w.shape[1]; ++i) {
        // arbitrary bit patterns, NaN payloads excluded
        std::uint32_t bits = static_cast<std::uint32_t>(rng.next_u64());
        float f;
        std::memcpy(&f, &bits, 4);
        if (std::isnan(f)) f = -0.0f;
        w.data.push_back(f);
      }
      ck.blocks.push_back(w);
    }
    save_checkpoint(ck, dir / "m.ckpt");
    const auto back = load_checkpoint(dir / "m.ckpt");
    CHECK(back.metadata == ck.metadata);
    REQUIRE(back.blocks.size() == ck.blocks.size());
    for (std::size_t b = 0; b < ck.blocks.size(); ++b) {
      CHECK(back.blocks[b].name == ck.blocks[b].name);
      CHECK(back.blocks[b].shape == ck.blocks[b].shape);
      REQUIRE(back.blocks[b].data.size() == ck.blocks[b].data.size());
      CHECK(std::memcmp(back.blocks[b].data.data(), ck.blocks[b].data.data(), 4 * ck.blocks[b].data.size()) == 0);
    }
  }
}

TEST_CASE("checkpoint errors") {
  const auto dir = scratch_dir("ckpt_err");
  Checkpoint ck;
  ck.blocks.push_back({"first", {2, 2}, {1, 2, 3, 4}});
  ck.blocks.push_back({"last", {3}, {5, 6, 7}});
  save_checkpoint(ck, dir / "m.ckpt");

  const auto size = fs::file_size(dir / "m.ckpt");
  fs::copy_file(dir / "m.ckpt", dir / "t.ckpt");
  fs::resize_file(dir / "t.ckpt", size - 4);
  CHECK(error_of([&] { load_checkpoint(dir / "t.ckpt"); }) == "truncated block last");

  std::string bytes;
  {
    std::ifstream in(dir / "m.ckpt", std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  bytes[8] = 7;  // version field
  write_file(dir / "v.ckpt", bytes);
  CHECK(error_of([&] { load_checkpoint(dir / "v.ckpt"); }).find("version 7") != std::string::npos);

  write_file(dir / "x.ckpt", "not a checkpoint at all");
  CHECK(error_of([&] { load_checkpoint(dir / "x.ckpt"); }).find("not a plansum checkpoint") != std::string::npos);

  Checkpoint wrong;
  wrong.blocks.push_back({"w", {2, 2}, {1, 2, 3}});
  CHECK_THROWS_AS(save_checkpoint(wrong, dir / "w.ckpt"), Error);
}
