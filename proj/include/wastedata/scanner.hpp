#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wastedata/glob.hpp"
#include "wastedata/waste_model.hpp"

namespace wastedata {

inline constexpr std::string_view kSnapshotFormat = "wastedata-snapshot";

struct ScanOptions {
  bool follow_symlinks = false;
  bool one_filesystem = false;
  std::vector<Glob> exclude_globs;
  unsigned workers = 1;
  // Pin the snapshot time; defaults to the wall clock at scan start.
  std::optional<std::int64_t> taken_at;
};

struct Snapshot {
  std::string root;  // absolute
  std::int64_t taken_at = 0;
  std::string tool_version;
  bool atime_reliable = true;
  std::vector<FileRecord> records;  // sorted by path, unique
  std::vector<std::string> warnings;

  bool operator==(const Snapshot&) const = default;
};

// Read-only walk of `root`. Unreadable subtrees are skipped and noted in
// warnings; a missing root throws DomainError. Output is independent of
// `workers`.
Snapshot scan(const std::filesystem::path& root, const ScanOptions& options = {});

// Line-delimited JSON: a header object, then one object per record.
void write_snapshot(const Snapshot& s, std::ostream& out);
void write_snapshot(const Snapshot& s, const std::filesystem::path& file);
Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& file);

// Checks ordering, uniqueness and record validity.
void validate(const Snapshot& s);

struct CategoryTally {
  std::uint64_t files = 0;
  std::uint64_t bytes = 0;
  bool operator==(const CategoryTally&) const = default;
};

// Aggregates over regular files only.
struct WasteReport {
  std::uint64_t total_files = 0;
  std::uint64_t total_bytes = 0;
  std::uint64_t never_accessed_files = 0;
  std::uint64_t never_accessed_bytes = 0;
  double never_accessed_files_pct = 0.0;
  double never_accessed_space_pct = 0.0;
  std::map<WasteCategory, CategoryTally> per_category;
  std::vector<std::string> warnings;

  double category_byte_share_pct(WasteCategory c) const;
};

// Classifies with `now` = snapshot.taken_at. The probe defaults to reading
// files under snapshot.root.
WasteReport report(const Snapshot& snapshot, const RuleSet& rules);
WasteReport report(const Snapshot& snapshot, const RuleSet& rules, const DigestProbe& probe);

nlohmann::json to_json(const WasteReport& r);
std::string format_table(const WasteReport& r);

struct ChurnReport {
  std::vector<std::string> added;
  std::vector<std::string> removed;
  std::vector<std::string> became_waste;
  std::vector<std::string> reactivated;
  bool classified = false;

  bool operator==(const ChurnReport&) const = default;
};

// Path-set churn between two scans of the same root. With rules, paths
// present in both are also compared by category (each side classified at
// its own taken_at). Throws DomainError when the roots differ.
ChurnReport diff(const Snapshot& before, const Snapshot& after, const RuleSet* rules = nullptr);
ChurnReport diff(const Snapshot& before, const Snapshot& after, const RuleSet& rules,
                 const DigestProbe& before_probe, const DigestProbe& after_probe);

nlohmann::json to_json(const ChurnReport& r);

}  // namespace wastedata
