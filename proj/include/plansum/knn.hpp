#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace plansum {

struct Neighbor {
  std::int64_t id;
  double score;  // dot product with the query
  bool operator==(const Neighbor&) const = default;
};

/// Exact maximum-inner-product index over N keys of dimension h. Immutable
/// after construction; queries are safe to run concurrently.
class KnnIndex {
 public:
  /// `keys` is row-major N x dim. Throws on size mismatch or duplicate ids.
  KnnIndex(std::size_t dim, std::vector<float> keys, std::vector<std::int64_t> ids);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  std::span<const float> key(std::size_t row) const { return {keys_.data() + row * dim_, dim_}; }
  std::int64_t id(std::size_t row) const { return ids_[row]; }
  std::size_t row_of(std::int64_t id) const { return rows_.at(id); }

  /// The k keys with the largest dot product (all keys when k > N), sorted by
  /// score descending with ties going to the lower id. Scores are accumulated
  /// in double precision.
  std::vector<Neighbor> topk(std::span<const float> query, std::size_t k) const;

 private:
  std::size_t dim_;
  std::vector<float> keys_;
  std::vector<std::int64_t> ids_;
  std::unordered_map<std::int64_t, std::size_t> rows_;
};

std::vector<Neighbor> knn_topk(const KnnIndex& index, std::span<const float> query, std::size_t k);

/// Attention restricted to the retrieved keys: softmax over the top-k scores
/// (scaled by `scale`) and the weighted sum of the matching rows of `values`
/// (N x value_dim, row-aligned with the index). With k >= N this is ordinary
/// full dot-product attention.
std::vector<double> topk_attention(const KnnIndex& index, std::span<const float> values,
                                   std::size_t value_dim, std::span<const float> query, std::size_t k,
                                   double scale = 1.0);

}  // namespace plansum
