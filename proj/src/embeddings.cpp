#include "plansum/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "plansum/error.hpp"
#include "plansum/text.hpp"

namespace plansum {

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim), oov_(dim, 0.0f) {
  if (dim == 0) throw Error("embedding dimension must be positive");
}

void EmbeddingTable::insert(std::string word, std::vector<float> vec) {
  if (vec.size() != dim_) {
    throw Error("embedding for '" + word + "' has " + std::to_string(vec.size()) +
                " components, expected " + std::to_string(dim_));
  }
  entries_.insert_or_assign(std::move(word), std::move(vec));
}

std::span<const float> EmbeddingTable::lookup(const std::string& word) const {
  const auto it = entries_.find(word);
  if (it == entries_.end()) return oov_;
  return it->second;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file " + path.string());
  EmbeddingTable table(dim);
  std::string line;
  while (std::getline(in, line)) {
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1) {
      throw ParseError("embedding for '" + fields[0] + "' has " + std::to_string(fields.size() - 1) +
                       " components, expected " + std::to_string(dim));
    }
    std::vector<float> vec(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const auto& f = fields[i + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[i]);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError("embedding for '" + fields[0] + "' has a non-numeric component '" + f + "'");
      }
    }
    table.insert(fields[0], std::move(vec));
  }
  return table;
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write embedding file " + path.string());
  std::vector<const std::string*> words;
  for (const auto& [w, _] : table.entries()) words.push_back(&w);
  std::sort(words.begin(), words.end(), [](auto* a, auto* b) { return *a < *b; });
  out << std::setprecision(9);
  for (const auto* w : words) {
    out << *w;
    for (float x : table.entries().at(*w)) out << ' ' << x;
    out << '\n';
  }
}

}  // namespace plansum
