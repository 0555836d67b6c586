#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "wastedata/scanner.hpp"
#include "wastedata/waste_model.hpp"

namespace wastedata {

struct HistogramBin {
  std::uint64_t files = 0;
  std::uint64_t bytes = 0;
  bool operator==(const HistogramBin&) const = default;
};

// Aggregate view of the waste in a snapshot that carries no path, name or
// content: only extension tokens, size classes and age classes.
struct RecoverSummary {
  std::map<std::string, HistogramBin> extensions;
  std::map<std::string, HistogramBin> size_buckets;
  std::map<std::string, HistogramBin> age_buckets;
  std::map<std::string, HistogramBin> categories;

  bool operator==(const RecoverSummary&) const = default;
};

inline constexpr std::size_t kMaxExtensionLength = 16;
inline constexpr std::string_view kNoExtension = "(none)";
inline constexpr std::string_view kLongExtension = "(long)";

// Lowercased text after the last '.' of the final component. Hidden-file
// dots and empty suffixes give kNoExtension; anything longer than
// kMaxExtensionLength or not alphanumeric gives kLongExtension.
std::string extension_token(std::string_view path);

// "0" for empty files, otherwise "2^k" for sizes in [2^k, 2^(k+1)).
std::string size_bucket(std::uint64_t bytes);

// Age since last modification, in day classes:
// <1d, 1-7d, 7-30d, 30-90d, 90-365d, 1-2y, >=2y.
std::string age_bucket(std::int64_t age_seconds);

// Histograms over regular files classified as waste, with `now` =
// snapshot.taken_at.
RecoverSummary recover_summary(const Snapshot& snapshot, const RuleSet& rules);
RecoverSummary recover_summary(const Snapshot& snapshot, const RuleSet& rules, const DigestProbe& probe);

nlohmann::json to_json(const RecoverSummary& s);

}  // namespace wastedata
