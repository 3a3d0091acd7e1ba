#include "plansum/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plansum/error.hpp"

namespace plansum {

KnnIndex::KnnIndex(std::size_t dim, std::vector<float> keys, std::vector<std::int64_t> ids)
    : dim_(dim), keys_(std::move(keys)), ids_(std::move(ids)) {
  if (dim_ == 0) throw Error("kNN index dimension must be positive");
  if (keys_.size() != ids_.size() * dim_) throw Error("kNN keys do not match ids x dim");
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    if (!rows_.emplace(ids_[r], r).second) throw Error("duplicate kNN id " + std::to_string(ids_[r]));
  }
}

std::vector<Neighbor> KnnIndex::topk(std::span<const float> query, std::size_t k) const {
  if (ids_.empty()) throw Error("query against an empty kNN index");
  if (query.size() != dim_) {
    throw Error("query has dimension " + std::to_string(query.size()) + ", index has " + std::to_string(dim_));
  }
  if (k == 0) throw Error("k must be at least 1");
  std::vector<Neighbor> all(ids_.size());
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    const float* row = keys_.data() + r * dim_;
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) s += static_cast<double>(row[j]) * static_cast<double>(query[j]);
    all[r] = {ids_[r], s};
  }
  const auto better = [](const Neighbor& a, const Neighbor& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  };
  const auto keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), better);
  all.resize(keep);
  return all;
}

std::vector<Neighbor> knn_topk(const KnnIndex& index, std::span<const float> query, std::size_t k) {
  return index.topk(query, k);
}

std::vector<double> topk_attention(const KnnIndex& index, std::span<const float> values, std::size_t value_dim,
                                   std::span<const float> query, std::size_t k, double scale) {
  if (values.size() != index.size() * value_dim) throw Error("values are not row-aligned with the index");
  const auto hits = index.topk(query, k);
  const double top = hits.front().score * scale;
  std::vector<double> w(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) w[i] = std::exp(hits[i].score * scale - top);
  const double z = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> out(value_dim, 0.0);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const float* v = values.data() + index.row_of(hits[i].id) * value_dim;
    for (std::size_t j = 0; j < value_dim; ++j) out[j] += w[i] / z * v[j];
  }
  return out;
}

}  // namespace plansum
