#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "wastedata/waste_model.hpp"

namespace wastedata::fixtures {

// One measured platform: share of files never accessed since last
// modification, and the share of used space those files hold.
struct PlatformProfile {
  std::string_view name;
  double never_accessed_files_pct;
  double never_accessed_space_pct;
};

inline constexpr PlatformProfile kMacBook{"macbook", 20.6, 98.5};
inline constexpr PlatformProfile kDesktop{"desktop", 47.4, 38.1};
inline constexpr PlatformProfile kServer{"server", 57.1, 99.5};
inline constexpr PlatformProfile kPlatforms[] = {kMacBook, kDesktop, kServer};

const PlatformProfile& platform(std::string_view name);  // throws DomainError

inline constexpr std::int64_t kBaseTime = 1'600'000'000;

struct TreeSpec {
  std::size_t files = 1000;
  std::size_t never_accessed_files = 0;
  std::uint64_t total_bytes = 4'000'000;
  std::uint64_t never_accessed_bytes = 0;
  std::int64_t base_time = kBaseTime;
};

TreeSpec tree_spec_for(const PlatformProfile& p, std::size_t files = 1000,
                       std::uint64_t total_bytes = 4'000'000);

// Writes spec.files sparse files under `dir` (created if needed) in ten
// subdirectories, with timestamps set so exactly never_accessed_files of
// them have atime == mtime and hold never_accessed_bytes in total. All
// timestamps are at or before spec.base_time.
void build_tree(const std::filesystem::path& dir, const TreeSpec& spec);

// Compiler by-products beside installed products, sized like an OpenSSL
// build: 44.5 MB of object files and 13.6 MB of libraries and binaries
// (MB = 10^6 bytes).
inline constexpr std::uint64_t kObjectBytes = 44'500'000;
inline constexpr std::uint64_t kProductBytes = 13'600'000;

void build_build_tree(const std::filesystem::path& dir, std::int64_t base_time = kBaseTime);

// Rules that mark the object files Unintentional and allowlist the products.
RuleSet build_tree_rules();

}  // namespace wastedata::fixtures
