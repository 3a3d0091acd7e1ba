#include "plansum/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <unordered_set>

namespace plansum {
namespace {

struct Codepoint {
  char32_t value;
  std::size_t offset;
  std::size_t length;
};

// Lenient decoder: invalid bytes are passed through as single-byte codepoints.
std::vector<Codepoint> decode_utf8(std::string_view s) {
  std::vector<Codepoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xC0 && b0 < 0xE0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if (b0 >= 0xE0 && b0 < 0xF0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xF0 && b0 < 0xF8) {
      len = 4;
      cp = b0 & 0x07;
    }
    if (len > 1) {
      bool ok = i + len <= s.size();
      for (std::size_t k = 1; ok && k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) ok = false;
        cp = (cp << 6) | (b & 0x3F);
      }
      if (!ok) {
        len = 1;
        cp = b0;
      }
    }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

bool is_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
         c == 0x205F || c == 0x3000;
}

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  if (c >= 0xA1 && c <= 0xBF) return c != 0xAA && c != 0xB5 && c != 0xBA;
  if (c == 0xD7 || c == 0xF7) return true;
  if (c >= 0x2010 && c <= 0x205E) return true;
  if (c >= 0x20A0 && c <= 0x20CF) return true;
  if (c >= 0x3001 && c <= 0x303F) return true;
  return false;
}

bool is_word(char32_t c) { return !is_space(c) && !is_punct(c); }

bool is_joiner(char32_t c) {
  switch (c) {
    case U'.':
    case U',':
    case U'\'':
    case U'-':
    case U'/':
    case U':':
    case U'&':
    case 0x2019:  // right single quote used as apostrophe
      return true;
    default:
      return false;
  }
}

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

const std::unordered_set<std::string_view>& abbreviations() {
  static const std::unordered_set<std::string_view> set = {
      "Inc.",  "Corp.", "Co.",   "Ltd.",  "L.L.C.", "v.",    "vs.",   "No.",   "Nos.",  "U.S.",
      "Mr.",   "Mrs.",  "Ms.",   "Dr.",   "Jr.",    "Sr.",   "St.",   "Gen.",  "Gov.",  "Sen.",
      "Rep.",  "Hon.",  "Ct.",   "Cir.",  "Dist.",  "Supp.", "App.",  "Cal.",  "Fla.",  "N.Y.",
      "Jan.",  "Feb.",  "Mar.",  "Apr.",  "Jun.",   "Jul.",  "Aug.",  "Sep.",  "Sept.", "Oct.",
      "Nov.",  "Dec.",  "e.g.",  "i.e.",  "cf.",    "al.",   "Art.",  "art.",  "Sec.",  "sec.",
      "para.", "pp.",   "p.",    "Id.",   "id.",    "Stat.", "Rev.",  "Dept.", "Assn.", "Bros.", "Doc.",  "Docs."};
  return set;
}

std::string_view strip_closers(std::string_view w) {
  while (!w.empty() && is_closer(w.back())) w.remove_suffix(1);
  // closing curly quotes are three bytes
  while (w.size() >= 3 && (w.substr(w.size() - 3) == "\xE2\x80\x9D" ||
                           w.substr(w.size() - 3) == "\xE2\x80\x99")) {
    w.remove_suffix(3);
  }
  while (!w.empty() && is_closer(w.back())) w.remove_suffix(1);
  return w;
}

// "(Doc." and "\"Inc." still end in an abbreviation
std::string_view strip_openers(std::string_view w) {
  while (!w.empty() && (w.front() == '"' || w.front() == '\'' || w.front() == '(' || w.front() == '[')) {
    w.remove_prefix(1);
  }
  return w;
}

bool starts_lowercase(std::string_view w) {
  for (char ch : w) {
    const auto c = static_cast<unsigned char>(ch);
    if (c == '"' || c == '\'' || c == '(' || c == '[') continue;
    return c >= 'a' && c <= 'z';
  }
  return false;
}

}  // namespace

bool is_guarded_abbreviation(std::string_view word) {
  if (abbreviations().contains(word)) return true;
  // single-letter initials ("J.") and dotted acronyms ("U.N.", "e.g.")
  if (word.size() >= 2 && word.back() == '.') {
    bool dotted = true;
    for (std::size_t i = 0; i < word.size(); ++i) {
      const bool letter = std::isalpha(static_cast<unsigned char>(word[i])) != 0;
      if ((i % 2 == 0 && !letter) || (i % 2 == 1 && word[i] != '.')) {
        dotted = false;
        break;
      }
    }
    if (dotted && word.size() % 2 == 0) {
      // "A." alone is an initial only when uppercase
      return word.size() > 2 || std::isupper(static_cast<unsigned char>(word[0]));
    }
  }
  return false;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (const auto& cp : decode_utf8(text)) {
    if (is_space(cp.value)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.append(text.substr(cp.offset, cp.length));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::vector<std::string> segment_sentences(std::string_view text) {
  const auto words = split_whitespace(text);
  std::vector<std::string> sentences;
  std::vector<std::string> current;
  for (std::size_t i = 0; i < words.size(); ++i) {
    current.push_back(words[i]);
    const std::string_view core = strip_closers(words[i]);
    bool boundary = false;
    if (!core.empty()) {
      const char last = core.back();
      if (last == '?' || last == '!') {
        boundary = true;
      } else if (last == '.') {
        boundary = !is_guarded_abbreviation(strip_openers(core));
      }
    }
    if (boundary && i + 1 < words.size() && starts_lowercase(words[i + 1])) boundary = false;
    if (boundary || i + 1 == words.size()) {
      sentences.push_back(join(current, " "));
      current.clear();
    }
  }
  return sentences;
}

std::string casefold(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (const auto& cp : decode_utf8(word)) {
    char32_t c = cp.value;
    if (c >= U'A' && c <= U'Z') {
      out.push_back(static_cast<char>(c - U'A' + U'a'));
    } else if (cp.length == 2 && c >= 0xC0 && c <= 0xDE && c != 0xD7) {
      c += 0x20;
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.append(word.substr(cp.offset, cp.length));
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view sentence, bool fold) {
  const auto cps = decode_utf8(sentence);
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(fold ? casefold(current) : current);
    current.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i].value;
    const auto bytes = sentence.substr(cps[i].offset, cps[i].length);
    if (is_space(c)) {
      flush();
    } else if (is_word(c)) {
      current.append(bytes);
    } else if (is_joiner(c) && !current.empty() && is_word(cps[i - 1].value) &&
               i + 1 < cps.size() && is_word(cps[i + 1].value)) {
      current.append(bytes);
    } else {
      flush();
      tokens.emplace_back(bytes);
    }
  }
  flush();
  return tokens;
}

}  // namespace plansum
