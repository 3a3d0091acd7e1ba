#include "plansum/conllu.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "plansum/error.hpp"

namespace plansum {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

bool parse_int(std::string_view s, int& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

[[noreturn]] void fail(std::size_t ordinal, const std::string& what) {
  throw ParseError("sentence " + std::to_string(ordinal) + ": " + what);
}

}  // namespace

std::vector<ParsedSentence> read_conllu(std::istream& in) {
  std::vector<ParsedSentence> out;
  ParsedSentence current;
  std::vector<int> raw_heads;
  bool has_content = false;

  auto finish = [&] {
    if (!has_content) return;
    const std::size_t ordinal = out.size() + 1;
    for (std::size_t i = 0; i < current.tokens.size(); ++i) {
      current.tokens[i].head = raw_heads[i] == 0 ? kRootHead : raw_heads[i] - 1;
    }
    try {
      current.validate();
    } catch (const Error& e) {
      fail(ordinal, e.what());
    }
    out.push_back(std::move(current));
    current = {};
    raw_heads.clear();
    has_content = false;
  };

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish();
      continue;
    }
    if (line[0] == '#') continue;
    has_content = true;
    const std::size_t ordinal = out.size() + 1;
    const auto cols = split_tabs(line);
    if (cols.size() != 10) {
      fail(ordinal, "expected 10 columns, found " + std::to_string(cols.size()));
    }
    const auto id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) continue;
    int id_value = 0;
    if (!parse_int(id, id_value)) fail(ordinal, "nonnumeric ID '" + std::string(id) + "'");
    if (id_value != static_cast<int>(current.tokens.size()) + 1) {
      fail(ordinal, "token IDs must be consecutive starting at 1");
    }
    int head = 0;
    if (!parse_int(cols[6], head)) fail(ordinal, "nonnumeric HEAD '" + std::string(cols[6]) + "'");
    ParsedToken tok;
    tok.form = std::string(cols[1]);
    tok.upos = std::string(cols[3]);
    tok.deprel = std::string(cols[7]);
    tok.space_after = std::string_view(cols[9]).find("SpaceAfter=No") == std::string_view::npos;
    current.tokens.push_back(std::move(tok));
    raw_heads.push_back(head);
  }
  finish();
  return out;
}

std::vector<ParsedSentence> load_parses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open CoNLL-U file " + path.string());
  return read_conllu(in);
}

void write_conllu(std::ostream& out, const std::vector<ParsedSentence>& sentences) {
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const auto& t = s.tokens[i];
      out << (i + 1) << '\t' << t.form << "\t_\t" << t.upos << "\t_\t_\t"
          << (t.head == kRootHead ? 0 : t.head + 1) << '\t' << t.deprel << "\t_\t"
          << (t.space_after ? "_" : "SpaceAfter=No") << '\n';
    }
    out << '\n';
  }
}

}  // namespace plansum
