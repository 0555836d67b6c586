#include "wastedata/fixtures.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "wastedata/errors.hpp"

namespace wastedata::fixtures {

namespace fs = std::filesystem;

namespace {

void make_file(const fs::path& path, std::uint64_t size, std::int64_t mtime, std::int64_t atime) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw DomainError("fixture: cannot create " + path.string());
  const bool ok = ::ftruncate(fd, static_cast<off_t>(size)) == 0;
  ::close(fd);
  if (!ok) throw DomainError("fixture: cannot size " + path.string());
  struct timespec ts[2] = {{static_cast<time_t>(atime), 0}, {static_cast<time_t>(mtime), 0}};
  if (::utimensat(AT_FDCWD, path.c_str(), ts, 0) != 0)
    throw DomainError("fixture: cannot set timestamps on " + path.string());
}

// Splits `total` into `parts` sizes differing by at most one byte.
std::uint64_t even_share(std::uint64_t total, std::size_t parts, std::size_t k) {
  return total / parts + (k < total % parts ? 1 : 0);
}

}  // namespace

const PlatformProfile& platform(std::string_view name) {
  for (const auto& p : kPlatforms)
    if (p.name == name) return p;
  throw DomainError("unknown platform profile '" + std::string(name) + "'");
}

TreeSpec tree_spec_for(const PlatformProfile& p, std::size_t files, std::uint64_t total_bytes) {
  TreeSpec s;
  s.files = files;
  s.total_bytes = total_bytes;
  s.never_accessed_files = static_cast<std::size_t>(std::llround(files * p.never_accessed_files_pct / 100.0));
  s.never_accessed_bytes =
      static_cast<std::uint64_t>(std::llround(static_cast<double>(total_bytes) * p.never_accessed_space_pct / 100.0));
  return s;
}

void build_tree(const fs::path& dir, const TreeSpec& spec) {
  const std::size_t k = spec.never_accessed_files;
  if (k > spec.files || spec.never_accessed_bytes > spec.total_bytes)
    throw DomainError("fixture: inconsistent tree spec");
  if ((k == 0 && spec.never_accessed_bytes > 0) ||
      (k == spec.files && spec.never_accessed_bytes != spec.total_bytes))
    throw DomainError("fixture: bytes cannot be placed on the requested files");

  constexpr std::size_t kDirs = 10;
  for (std::size_t d = 0; d < kDirs; ++d) fs::create_directories(dir / ("d" + std::to_string(d)));

  std::size_t never_seen = 0, accessed_seen = 0;
  for (std::size_t i = 0; i < spec.files; ++i) {
    // Spread the never-accessed files evenly through the index range.
    const bool never = (i + 1) * k / spec.files > i * k / spec.files;
    const std::int64_t mtime = spec.base_time - static_cast<std::int64_t>(i % 400) * 86400 - 7200;
    std::uint64_t size;
    std::int64_t atime;
    if (never) {
      size = even_share(spec.never_accessed_bytes, k, never_seen++);
      atime = mtime;
    } else {
      size = even_share(spec.total_bytes - spec.never_accessed_bytes, spec.files - k, accessed_seen++);
      atime = mtime + 3600;
    }
    char name[32];
    std::snprintf(name, sizeof name, "f%05zu.dat", i);
    make_file(dir / ("d" + std::to_string(i % kDirs)) / name, size, mtime, atime);
  }
}

void build_build_tree(const fs::path& dir, std::int64_t base_time) {
  constexpr std::size_t kObjects = 500;
  const char* subdirs[] = {"crypto", "ssl", "engines", "apps"};
  for (auto* s : subdirs) fs::create_directories(dir / s);
  for (std::size_t i = 0; i < kObjects; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "obj%03zu.o", i);
    const auto t = base_time - 600 + static_cast<std::int64_t>(i % 60);
    make_file(dir / subdirs[i % 4] / name, even_share(kObjectBytes, kObjects, i), t, t + 5);
  }
  make_file(dir / "libcrypto.a", 10'000'000, base_time - 30, base_time - 10);
  make_file(dir / "libssl.a", 3'000'000, base_time - 30, base_time - 10);
  make_file(dir / "apps" / "openssl", 600'000, base_time - 20, base_time - 5);
}

RuleSet build_tree_rules() {
  return RuleSet::from_json({{"unintentional_globs", {"*.o"}},
                             {"not_waste_globs", {"libcrypto.a", "libssl.a", "apps/openssl"}},
                             {"used_threshold_secs", 10LL * 365 * 86400}});
}

}  // namespace wastedata::fixtures
