#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace plansum {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct WeightBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> data;

  std::size_t declared_size() const;
};

/// A model snapshot: free-form JSON metadata plus named float32 blocks.
///
/// File layout (all integers little-endian):
///   8 bytes   magic "PLSMCKPT"
///   u32       format version
///   u64       manifest length in bytes
///   manifest  UTF-8 JSON: {"format_version", "metadata", "blocks": [{"name", "shape"}]}
///   blocks    float32 little-endian data, in manifest order
struct Checkpoint {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<WeightBlock> blocks;

  const WeightBlock& block(const std::string& name) const;
  const WeightBlock* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace plansum
