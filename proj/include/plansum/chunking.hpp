#pragma once

#include <cstddef>
#include <vector>

namespace plansum {

/// Half-open token range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

struct Chunk {
  Span chunk;  // tokens fed to the encoder
  Span kept;   // encodings retained from this chunk
};

/// Overlapping encoder windows for long inputs. Window starts advance by
/// chunk_size * (1 - overlap); the final window is aligned to the end of the
/// input. Each window keeps the centered stretch of `stride` positions (the
/// middle half when overlap = 0.5); the first window also keeps its leading
/// edge and the last its trailing edge, so the kept spans tile [0, n) exactly.
std::vector<Chunk> chunk_overlapping(std::size_t n_tokens, std::size_t chunk_size, double overlap);

}  // namespace plansum
