#include "plansum/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "plansum/conllu.hpp"
#include "plansum/error.hpp"
#include "plansum/text.hpp"

namespace plansum {

void ParsedSentence::validate() const {
  if (tokens.empty()) throw Error("empty sentence");
  int roots = 0;
  const auto n = static_cast<int>(tokens.size());
  for (const auto& t : tokens) {
    if (t.head == kRootHead) {
      ++roots;
    } else if (t.head < 0 || t.head >= n) {
      throw Error("head index " + std::to_string(t.head) + " out of range for token '" +
                  t.form + "'");
    }
  }
  if (roots != 1) throw Error("expected exactly one root, found " + std::to_string(roots));
}

std::vector<std::size_t> ParsedSentence::children(std::size_t head) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].head == static_cast<int>(head)) out.push_back(i);
  }
  return out;
}

std::string ParsedSentence::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out += tokens[i].form;
    if (i + 1 < tokens.size() && tokens[i].space_after) out += ' ';
  }
  return out;
}

namespace {

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path.string());
  const auto base = path.parent_path();

  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_error(lineno, std::string("malformed JSON: ") + e.what()));
    }
    if (!j.is_object()) throw ParseError(line_error(lineno, "expected a JSON object"));
    for (const char* field : {"id", "doc", "summary"}) {
      if (!j.contains(field)) throw ParseError(line_error(lineno, std::string("missing field ") + field));
    }
    CaseRecord rec;
    if (!j["id"].is_string() || j["id"].get<std::string>().empty()) {
      throw ParseError(line_error(lineno, "field id must be a nonempty string"));
    }
    rec.id = j["id"].get<std::string>();
    if (!seen.insert(rec.id).second) throw ParseError("duplicate id " + rec.id);

    const auto& doc = j["doc"];
    if (doc.is_string()) {
      rec.doc_sentences = segment_sentences(doc.get<std::string>());
    } else if (doc.is_array()) {
      for (const auto& s : doc) {
        if (!s.is_string()) throw ParseError(line_error(lineno, "doc entries must be strings"));
        rec.doc_sentences.push_back(s.get<std::string>());
      }
    } else {
      throw ParseError(line_error(lineno, "field doc must be a string or a list of strings"));
    }
    if (rec.doc_sentences.empty()) throw ParseError(line_error(lineno, "doc has no sentences"));
    if (!j["summary"].is_string()) throw ParseError(line_error(lineno, "field summary must be a string"));
    rec.gold_summary = j["summary"].get<std::string>();

    try {
      if (j.contains("doc_conllu_path")) {
        rec.doc_parses = load_parses(base / j["doc_conllu_path"].get<std::string>());
        if (rec.doc_parses->size() != rec.doc_sentences.size()) {
          throw Error("doc parses have " + std::to_string(rec.doc_parses->size()) +
                      " sentences but doc has " + std::to_string(rec.doc_sentences.size()));
        }
      }
      if (j.contains("summary_conllu_path")) {
        rec.summary_parses = load_parses(base / j["summary_conllu_path"].get<std::string>());
      }
    } catch (const Error& e) {
      throw ParseError(line_error(lineno, e.what()));
    }
    corpus.push_back(std::move(rec));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, bool write_parses) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus file " + path.string());
  const auto parse_dir_name = path.stem().string() + ".parses";
  if (write_parses) std::filesystem::create_directories(path.parent_path() / parse_dir_name);
  auto write_parse_file = [&](const std::string& name, const std::vector<ParsedSentence>& parses) {
    const auto rel = std::filesystem::path(parse_dir_name) / name;
    std::ofstream f(path.parent_path() / rel);
    if (!f) throw Error("cannot write parse file " + (path.parent_path() / rel).string());
    write_conllu(f, parses);
    return rel.generic_string();
  };
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    const auto& rec = corpus[r];
    nlohmann::json j;
    j["id"] = rec.id;
    j["doc"] = rec.doc_sentences;
    j["summary"] = rec.gold_summary;
    if (write_parses && rec.doc_parses) j["doc_conllu_path"] = write_parse_file(std::to_string(r) + ".doc.conllu", *rec.doc_parses);
    if (write_parses && rec.summary_parses) {
      j["summary_conllu_path"] = write_parse_file(std::to_string(r) + ".summary.conllu", *rec.summary_parses);
    }
    out << j.dump() << '\n';
  }
}

const CaseRecord* find_record(const Corpus& corpus, const std::string& id) {
  for (const auto& r : corpus) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

}  // namespace plansum
