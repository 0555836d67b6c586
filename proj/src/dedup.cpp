#include "wastedata/dedup.hpp"

#include <array>
#include <bit>

#include "wastedata/errors.hpp"

namespace wastedata {

namespace {

constexpr std::array<std::uint64_t, 256> make_table() {
  std::array<std::uint64_t, 256> t{};
  std::uint64_t x = 0x9e3779b97f4a7c15ull;  // splitmix64
  for (auto& v : t) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    v = z ^ (z >> 31);
  }
  return t;
}

constexpr auto kBuzTable = make_table();

// Cut when the low bits are zero; expected spacing past min_chunk is about
// target_chunk - min_chunk.
std::uint64_t cut_mask(const ChunkingConfig& c) {
  const std::size_t spread = c.target_chunk - c.min_chunk;
  if (spread <= 1) return 0;
  return std::bit_floor(spread) - 1;
}

}  // namespace

void ChunkingConfig::validate() const {
  if (min_chunk == 0 || min_chunk > target_chunk || target_chunk > max_chunk)
    throw DomainError("chunking: need 0 < min_chunk <= target_chunk <= max_chunk");
  if (window == 0) throw DomainError("chunking: window must be > 0");
}

std::vector<std::size_t> chunk_boundaries(std::string_view data, const ChunkingConfig& config) {
  config.validate();
  std::vector<std::size_t> ends;
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  const std::size_t n = data.size();
  const std::size_t w = config.window;
  const unsigned out_rot = static_cast<unsigned>(w % 64);
  const std::uint64_t mask = cut_mask(config);

  std::uint64_t h = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    h = std::rotl(h, 1) ^ kBuzTable[p[i]];
    if (i >= w) h ^= std::rotl(kBuzTable[p[i - w]], static_cast<int>(out_rot));

    const std::size_t len = i + 1 - start;
    if (len < config.min_chunk) continue;
    if (len >= config.max_chunk || (i + 1 >= w && (h & mask) == 0)) {
      ends.push_back(i + 1);
      start = i + 1;
    }
  }
  if (start < n) ends.push_back(n);
  return ends;
}

std::vector<std::string> chunk(std::string_view data, const ChunkingConfig& config) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  for (auto end : chunk_boundaries(data, config)) {
    out.emplace_back(data.substr(begin, end - begin));
    begin = end;
  }
  return out;
}

ChunkStore::ChunkStore(ChunkingConfig config) : config_(config) { config_.validate(); }

IngestResult ChunkStore::ingest(const std::string& object_id, std::string_view data) {
  if (objects_.count(object_id)) throw DomainError("dedup: object '" + object_id + "' already ingested");
  IngestResult r;
  r.logical_bytes = data.size();
  std::vector<Digest> recipe;
  std::size_t begin = 0;
  for (auto end : chunk_boundaries(data, config_)) {
    const auto piece = data.substr(begin, end - begin);
    begin = end;
    const Digest d = sha256(piece);
    auto [it, inserted] = index_.try_emplace(d);
    if (inserted) {
      it->second.bytes.assign(piece);
      r.physical_new_bytes += piece.size();
    }
    ++it->second.refcount;
    recipe.push_back(d);
  }
  objects_.emplace(object_id, std::move(recipe));
  logical_bytes_ += r.logical_bytes;
  physical_bytes_ += r.physical_new_bytes;
  return r;
}

const std::vector<Digest>& ChunkStore::recipe(const std::string& object_id) const {
  auto it = objects_.find(object_id);
  if (it == objects_.end()) throw NotFoundError("dedup: no object '" + object_id + "'");
  return it->second;
}

std::string ChunkStore::restore(const std::string& object_id) const {
  std::string out;
  for (const auto& d : recipe(object_id)) {
    auto it = index_.find(d);
    if (it == index_.end())
      throw CorruptionError("dedup: object '" + object_id + "' references missing chunk " + to_hex(d));
    if (sha256(it->second.bytes) != d)
      throw CorruptionError("dedup: chunk " + to_hex(d) + " does not match its digest");
    out += it->second.bytes;
  }
  return out;
}

std::uint64_t ChunkStore::refcount(const Digest& d) const {
  auto it = index_.find(d);
  return it == index_.end() ? 0 : it->second.refcount;
}

bool ChunkStore::verify_refcounts() const {
  std::unordered_map<Digest, std::uint64_t, DigestHash> counted;
  for (const auto& [_, recipe] : objects_)
    for (const auto& d : recipe) ++counted[d];
  if (counted.size() != index_.size()) return false;
  for (const auto& [d, c] : index_) {
    auto it = counted.find(d);
    if (it == counted.end() || it->second != c.refcount) return false;
  }
  return true;
}

bool ChunkStore::drop_chunk(const Digest& d) {
  auto it = index_.find(d);
  if (it == index_.end()) return false;
  physical_bytes_ -= it->second.bytes.size();
  index_.erase(it);
  return true;
}

DedupStats ChunkStore::stats() const {
  return {objects_.size(), index_.size(), logical_bytes_, physical_bytes_};
}

nlohmann::json to_json(const DedupStats& s) {
  return {{"objects", s.objects},
          {"chunks", s.chunks},
          {"logical_bytes", s.logical_bytes},
          {"physical_bytes", s.physical_bytes},
          {"dedup_ratio", s.ratio()}};
}

}  // namespace wastedata
