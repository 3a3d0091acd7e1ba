#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace plansum {

/// Frozen word vectors. Lookups never fail: unknown words map to the all-zero
/// OOV vector.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }

  void insert(std::string word, std::vector<float> vec);
  bool contains(const std::string& word) const { return entries_.contains(word); }
  std::span<const float> lookup(const std::string& word) const;
  std::span<const float> oov_vector() const { return oov_; }

  const std::unordered_map<std::string, std::vector<float>>& entries() const { return entries_; }

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<float>> entries_;
  std::vector<float> oov_;
};

/// Text format: one word per line followed by exactly `dim` reals.
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t dim);
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

}  // namespace plansum
