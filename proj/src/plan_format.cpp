#include "plansum/plan_format.hpp"

#include "plansum/error.hpp"

namespace plansum {

namespace {

bool is_run_char(char c) { return c == '-' || c == '|'; }

enum class Sep { none, dash, pipe, triple };

struct Piece {
  std::string text;
  Sep sep_after = Sep::none;
  std::size_t start = 0;       // source offset where the component begins
  std::size_t sep_offset = 0;  // offset of the separator run in the source
};

[[noreturn]] void fail(std::size_t offset, const std::string& what) {
  throw ParseError("plan text, offset " + std::to_string(offset) + ": " + what);
}

/// Splits into components separated by unescaped separators.
std::vector<Piece> split_pieces(std::string_view s) {
  std::vector<Piece> pieces(1);
  const std::size_t n = s.size();
  std::size_t comp_start = 0;
  std::size_t i = 0;
  while (i < n) {
    const char c = s[i];
    if (!is_run_char(c)) {
      pieces.back().text += c;
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && s[j] == c) ++j;
    const std::size_t len = j - i;
    const bool touching = i == 0 || s[i - 1] == ' ' || j == n || s[j] == ' ';
    if (!touching) {
      pieces.back().text.append(len, c);
    } else if (len % 2 == 0) {
      pieces.back().text.append(len / 2, c);
    } else {
      const bool spaced = i > comp_start && s[i - 1] == ' ' && j < n && s[j] == ' ';
      if (!spaced) fail(i, "unescaped '" + std::string(1, c) + "' next to a space or boundary");
      Sep sep = Sep::none;
      if (c == '-' && len == 1) sep = Sep::dash;
      if (c == '|' && len == 1) sep = Sep::pipe;
      if (c == '|' && len == 3) sep = Sep::triple;
      if (sep == Sep::none) fail(i, "run of " + std::to_string(len) + " '" + std::string(1, c) + "' is not a separator");
      pieces.back().text.pop_back();  // the space before the separator
      pieces.back().sep_after = sep;
      pieces.back().sep_offset = i;
      i = j + 1;
      comp_start = i;
      pieces.emplace_back();
      pieces.back().start = i;
      continue;
    }
    i = j;
  }
  return pieces;
}

}  // namespace

std::string escape_plan_component(std::string_view comp) {
  std::string out;
  const std::size_t n = comp.size();
  std::size_t i = 0;
  while (i < n) {
    const char c = comp[i];
    if (!is_run_char(c)) {
      out += c;
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && comp[j] == c) ++j;
    const bool touching = i == 0 || comp[i - 1] == ' ' || j == n || comp[j] == ' ';
    out.append(touching ? 2 * (j - i) : j - i, c);
    i = j;
  }
  return out;
}

std::string linearize_plan(const Plan& plan, bool sentence_marker) {
  std::string out;
  for (std::size_t k = 0; k < plan.tuples.size(); ++k) {
    const auto& t = plan.tuples[k];
    if (k > 0) {
      const bool new_sentence = sentence_marker && t.sentence != plan.tuples[k - 1].sentence;
      out += new_sentence ? " ||| " : " | ";
    }
    out += escape_plan_component(t.subject);
    out += " - ";
    out += escape_plan_component(t.predicate);
    out += " - ";
    out += escape_plan_component(t.object);
  }
  return out;
}

Plan parse_plan(std::string_view text) {
  Plan plan;
  if (text.empty()) return plan;
  const auto pieces = split_pieces(text);
  std::size_t sentence = 0;
  std::size_t p = 0;
  while (p < pieces.size()) {
    if (p + 2 >= pieces.size()) fail(pieces[p].start, "tuple needs three components");
    if (pieces[p].sep_after != Sep::dash || pieces[p + 1].sep_after != Sep::dash) {
      const auto& bad = pieces[p].sep_after != Sep::dash ? pieces[p] : pieces[p + 1];
      fail(bad.sep_offset, "expected ' - ' between tuple components");
    }
    plan.tuples.push_back({pieces[p].text, pieces[p + 1].text, pieces[p + 2].text, sentence});
    const Sep after = pieces[p + 2].sep_after;
    if (after == Sep::dash) fail(pieces[p + 2].sep_offset, "tuple has more than three components");
    if (after == Sep::triple) ++sentence;
    p += 3;
    if (after == Sep::none && p != pieces.size()) fail(text.size(), "trailing text");
    if (after != Sep::none && p == pieces.size()) fail(pieces[p - 1].sep_offset, "separator at end of plan");
  }
  return plan;
}

std::string linearize_entity_plan(const EntityPlan& plan) {
  std::string out;
  for (std::size_t s = 0; s < plan.chains.size(); ++s) {
    if (s > 0) out += " ||| ";
    for (std::size_t e = 0; e < plan.chains[s].size(); ++e) {
      if (plan.chains[s][e].empty()) throw Error("entity plans cannot hold empty entities");
      if (e > 0) out += " | ";
      out += escape_plan_component(plan.chains[s][e]);
    }
  }
  return out;
}

EntityPlan parse_entity_plan(std::string_view text) {
  EntityPlan plan;
  if (text.empty()) return plan;
  const auto pieces = split_pieces(text);
  std::vector<std::vector<const Piece*>> groups(1);
  for (const auto& piece : pieces) {
    if (piece.sep_after == Sep::dash) fail(piece.sep_offset, "' - ' is not an entity separator");
    groups.back().push_back(&piece);
    if (piece.sep_after == Sep::triple) groups.emplace_back();
  }
  for (const auto& group : groups) {
    auto& chain = plan.chains.emplace_back();
    if (group.size() == 1 && group[0]->text.empty()) continue;  // sentence without entities
    for (const auto* piece : group) {
      if (piece->text.empty()) fail(piece->start, "empty entity");
      chain.push_back(piece->text);
    }
  }
  return plan;
}

}  // namespace plansum
