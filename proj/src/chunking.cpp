#include "plansum/chunking.hpp"

#include <cmath>

#include "plansum/error.hpp"

namespace plansum {

std::vector<Chunk> chunk_overlapping(std::size_t n, std::size_t chunk_size, double overlap) {
  if (chunk_size < 4 || chunk_size % 2 != 0) throw Error("chunk_size must be even and at least 4");
  if (!(overlap > 0.0 && overlap < 1.0)) throw Error("overlap must lie strictly between 0 and 1");
  std::vector<Chunk> chunks;
  if (n == 0) return chunks;
  if (n <= chunk_size) {
    chunks.push_back({{0, n}, {0, n}});
    return chunks;
  }
  const auto stride = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(chunk_size) * (1.0 - overlap))));
  const std::size_t lead = (chunk_size - stride) / 2;

  std::size_t start = 0;
  std::size_t kept_begin = 0;
  while (true) {
    const bool last = start + chunk_size >= n;
    if (last) start = n - chunk_size;
    const std::size_t kept_end = last ? n : start + lead + stride;
    chunks.push_back({{start, start + chunk_size}, {kept_begin, kept_end}});
    if (last) break;
    kept_begin = kept_end;
    start += stride;
  }
  return chunks;
}

}  // namespace plansum
