#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "wastedata/digest.hpp"

namespace wastedata {

struct ChunkingConfig {
  std::size_t min_chunk = 2 * 1024;
  std::size_t target_chunk = 8 * 1024;
  std::size_t max_chunk = 64 * 1024;
  std::size_t window = 48;  // rolling-hash window width in bytes

  void validate() const;
};

// End offsets of each chunk. A boundary falls after byte i when the rolling
// hash of the `window` bytes ending at i satisfies the cut condition and the
// chunk has reached min_chunk, or when it reaches max_chunk. The hash rolls
// across chunk boundaries, so boundaries depend only on nearby content.
std::vector<std::size_t> chunk_boundaries(std::string_view data, const ChunkingConfig& config);

std::vector<std::string> chunk(std::string_view data, const ChunkingConfig& config);

struct IngestResult {
  std::uint64_t logical_bytes = 0;
  std::uint64_t physical_new_bytes = 0;
};

struct DedupStats {
  std::uint64_t objects = 0;
  std::uint64_t chunks = 0;
  std::uint64_t logical_bytes = 0;
  std::uint64_t physical_bytes = 0;
  double ratio() const {
    return physical_bytes == 0 ? 1.0 : static_cast<double>(logical_bytes) / static_cast<double>(physical_bytes);
  }
};

// In-memory content-addressed store. Chunks are identified by SHA-256 alone;
// matching digests are not byte-compared.
class ChunkStore {
 public:
  explicit ChunkStore(ChunkingConfig config = {});

  // Throws DomainError if object_id is already present.
  IngestResult ingest(const std::string& object_id, std::string_view data);

  // Throws NotFoundError for an unknown id and CorruptionError when a chunk
  // of the recipe is missing or no longer matches its digest.
  std::string restore(const std::string& object_id) const;

  bool contains(const std::string& object_id) const { return objects_.count(object_id) != 0; }
  const std::vector<Digest>& recipe(const std::string& object_id) const;
  std::uint64_t refcount(const Digest& d) const;

  // Recounts references across every recipe and compares with the stored
  // refcounts.
  bool verify_refcounts() const;

  // Drops a chunk from the index without touching recipes, as a failing
  // medium would. Returns false if it was not stored.
  bool drop_chunk(const Digest& d);

  DedupStats stats() const;
  const ChunkingConfig& config() const { return config_; }

 private:
  struct StoredChunk {
    std::string bytes;
    std::uint64_t refcount = 0;
  };

  ChunkingConfig config_;
  std::unordered_map<Digest, StoredChunk, DigestHash> index_;
  std::map<std::string, std::vector<Digest>> objects_;
  std::uint64_t logical_bytes_ = 0;
  std::uint64_t physical_bytes_ = 0;
};

nlohmann::json to_json(const DedupStats& s);

}  // namespace wastedata
