#include "plansum/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "plansum/error.hpp"

namespace plansum {
namespace {

constexpr std::array<char, 8> kMagic = {'P', 'L', 'S', 'M', 'C', 'K', 'P', 'T'};

template <class UInt>
void write_le(std::ostream& out, UInt v) {
  std::array<char, sizeof(UInt)> bytes{};
  for (std::size_t i = 0; i < sizeof(UInt); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <class UInt>
bool read_le(std::istream& in, UInt& v) {
  std::array<unsigned char, sizeof(UInt)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) return false;
  v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return true;
}

}  // namespace

std::size_t WeightBlock::declared_size() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

const WeightBlock* Checkpoint::find(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const WeightBlock& Checkpoint::block(const std::string& name) const {
  const auto* b = find(name);
  if (!b) throw Error("checkpoint has no block " + name);
  return *b;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["metadata"] = ckpt.metadata;
  manifest["blocks"] = nlohmann::json::array();
  for (const auto& b : ckpt.blocks) {
    if (b.declared_size() != b.data.size()) {
      throw Error("block " + b.name + " holds " + std::to_string(b.data.size()) +
                  " values but its shape declares " + std::to_string(b.declared_size()));
    }
    manifest["blocks"].push_back({{"name", b.name}, {"shape", b.shape}});
  }
  const std::string text = manifest.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& b : ckpt.blocks) {
    for (float x : b.data) write_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
  }
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error("not a plansum checkpoint: " + path.string());
  }
  std::uint32_t version = 0;
  if (!read_le(in, version)) throw Error("truncated checkpoint header");
  if (version != kCheckpointVersion) {
    throw Error("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                std::to_string(kCheckpointVersion) + ")");
  }
  std::uint64_t len = 0;
  if (!read_le(in, len)) throw Error("truncated checkpoint header");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw Error("truncated checkpoint manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("corrupt checkpoint manifest: ") + e.what());
  }
  Checkpoint ckpt;
  ckpt.metadata = manifest.value("metadata", nlohmann::json::object());
  for (const auto& entry : manifest.at("blocks")) {
    WeightBlock b;
    b.name = entry.at("name").get<std::string>();
    b.shape = entry.at("shape").get<std::vector<std::size_t>>();
    b.data.resize(b.declared_size());
    for (auto& x : b.data) {
      std::uint32_t bits = 0;
      if (!read_le(in, bits)) throw Error("truncated block " + b.name);
      x = std::bit_cast<float>(bits);
    }
    ckpt.blocks.push_back(std::move(b));
  }
  return ckpt;
}

}  // namespace plansum
