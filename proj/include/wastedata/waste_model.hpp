#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wastedata/glob.hpp"

namespace wastedata {

enum class FileKind { Regular, Directory, Symlink, Other };

std::string_view to_string(FileKind k);
FileKind parse_file_kind(std::string_view s);

// One scanned filesystem object. Timestamps are whole seconds since the epoch;
// `path` is relative to the snapshot root with '/' separators.
struct FileRecord {
  std::string path;
  std::uint64_t size_bytes = 0;
  std::int64_t mtime = 0;
  std::int64_t atime = 0;
  FileKind kind = FileKind::Regular;
  // Blocks actually allocated, when it differs from the logical size.
  std::optional<std::uint64_t> allocated_bytes;
  // Set on every path of a multiply-linked inode except the first in path
  // order; such records carry size_bytes = 0 so space is counted once.
  std::optional<std::string> hardlink_of;

  bool operator==(const FileRecord&) const = default;
};

// Throws DomainError when a timestamp is negative or the path is empty.
void validate(const FileRecord& r);

enum class WasteCategory { Unintentional, Used, Degraded, Unwanted, NotWaste };

inline constexpr WasteCategory kAllCategories[] = {
    WasteCategory::Unintentional, WasteCategory::Used, WasteCategory::Degraded,
    WasteCategory::Unwanted, WasteCategory::NotWaste};

std::string_view to_string(WasteCategory c);
WasteCategory parse_category(std::string_view s);
inline bool is_waste(WasteCategory c) { return c != WasteCategory::NotWaste; }

struct FLifetime {
  std::uint64_t seconds = 0;
  auto operator<=>(const FLifetime&) const = default;
};

// Time between last modification and last access, clamped at zero.
// Zero means the file has not been read since it was last written.
// Throws DomainError for anything but a regular file.
FLifetime f_lifetime(const FileRecord& record);

struct DegradedCheck {
  Glob glob;
  std::string expected_sha256;  // lowercase hex
};

// The five rule groups. Load through from_json/load so patterns and digests
// are validated up front.
struct RuleSet {
  std::vector<Glob> not_waste_globs;
  std::vector<Glob> unintentional_globs;
  std::vector<Glob> unwanted_globs;
  std::vector<DegradedCheck> degraded_checks;
  std::int64_t used_threshold_secs = 0;

  static RuleSet from_json(const nlohmann::json& j);
  static RuleSet load(const std::filesystem::path& file);
  nlohmann::json to_json() const;
  void validate() const;
};

// Which rule groups matched a record.
struct MatchMask {
  bool not_waste = false;
  bool degraded = false;
  bool unintentional = false;
  bool unwanted = false;
  bool used = false;
};

// NotWaste allowlist > Degraded > Unintentional > Unwanted > Used > NotWaste.
WasteCategory resolve_precedence(const MatchMask& m);

struct Classification {
  WasteCategory category = WasteCategory::NotWaste;
  std::string reason;
};

// Returns the content digest of a regular file as lowercase hex, or nullopt
// when the file cannot be read.
using DigestProbe = std::function<std::optional<std::string>(const FileRecord&)>;

// Probe that reads `root / record.path` from disk.
DigestProbe file_digest_probe(std::filesystem::path root);

// Assigns exactly one category. Rule groups are tested in precedence order
// and the probe is consulted only when a degraded check's glob matches a
// regular file; a probe returning nullopt flags the file Degraded with
// reason "unreadable".
Classification classify(const FileRecord& record, const RuleSet& rules, std::int64_t now,
                        const DigestProbe& probe);

}  // namespace wastedata
