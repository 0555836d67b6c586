#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace wastedata {

struct LandfillConfig {
  std::uint64_t capacity_bytes = 0;
  std::uint64_t fade_lifetime_epochs = 1;
  bool refresh_on_read = true;

  void validate() const;
};

enum class PutResult { Stored, RejectedTooLarge };

struct FadeStats {
  std::uint64_t entries_faded = 0;
  std::uint64_t bytes_reclaimed = 0;
  bool operator==(const FadeStats&) const = default;
};

struct LandfillStats {
  std::uint64_t live_entries = 0;
  std::uint64_t live_bytes = 0;
  std::uint64_t capacity_bytes = 0;
  std::uint64_t current_epoch = 0;
  std::uint64_t lifetime_evictions = 0;
  std::uint64_t lifetime_fades = 0;
  bool operator==(const LandfillStats&) const = default;
};

// Semi-volatile key-value store. Time advances only through advance_epoch;
// an entry fades once it has gone more than fade_lifetime_epochs epochs
// without a put or (with refresh_on_read) a get. Capacity pressure evicts
// the least recently accessed entries first, breaking ties by key.
//
// Not internally synchronized.
class Landfill {
 public:
  explicit Landfill(LandfillConfig config);

  // Every subsequent operation is appended to `log` in trace grammar.
  // Pass nullptr to detach. The stream must outlive the store.
  void attach_log(std::ostream* log) { log_ = log; }

  PutResult put(std::string key, std::string value);
  // nullopt when the key was never stored, faded or was evicted.
  std::optional<std::string> get(std::string_view key);
  // Throws DomainError when n == 0.
  FadeStats advance_epoch(std::uint64_t n);
  LandfillStats stats() const;

  std::optional<std::uint64_t> last_access_epoch(std::string_view key) const;
  const LandfillConfig& config() const { return config_; }

 private:
  struct Entry {
    std::string value;
    std::uint64_t last_access = 0;
  };

  void touch(std::map<std::string, Entry, std::less<>>::iterator it);
  void erase(std::map<std::string, Entry, std::less<>>::iterator it);

  LandfillConfig config_;
  std::map<std::string, Entry, std::less<>> entries_;
  std::set<std::pair<std::uint64_t, std::string>> lru_;  // (last_access, key)
  std::uint64_t epoch_ = 0;
  std::uint64_t live_bytes_ = 0;
  std::uint64_t evictions_ = 0;
  std::uint64_t fades_ = 0;
  std::ostream* log_ = nullptr;
};

// One line of the trace grammar:
//   PUT <key> <size> [<hex value>]
//   GET <key>
//   ADV <n>
// Keys are percent-encoded tokens. Blank lines and '#' comments are skipped.
struct TraceOp {
  enum class Kind { Put, Get, Advance };
  Kind kind = Kind::Get;
  std::string key;  // decoded
  std::uint64_t size = 0;
  std::optional<std::string> value;
  std::uint64_t epochs = 0;
  std::size_t line = 0;
};

std::vector<TraceOp> parse_trace(std::istream& in);
std::string format_trace_op(const TraceOp& op);

std::string encode_key(std::string_view key);
std::string decode_key(std::string_view token);

// Deterministic stand-in value when a trace gives only a size.
std::string filler_value(std::string_view key, std::uint64_t size);

// Applies one operation and describes the outcome, including a stats
// snapshot taken afterwards.
nlohmann::json apply(Landfill& store, const TraceOp& op);
nlohmann::json to_json(const LandfillStats& s);

// Rebuilds a store from an operation log.
Landfill replay_log(std::istream& log, LandfillConfig config);

}  // namespace wastedata
