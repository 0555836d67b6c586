#include "wastedata/scanner.hpp"

#include <dirent.h>
#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>
#include <sys/statvfs.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "wastedata/errors.hpp"

namespace wastedata {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ScanItem {
  FileRecord record;
  dev_t dev = 0;
  ino_t ino = 0;
};

// Entry names of a directory, read without touching its atime where the
// kernel allows it. Returns an error message on failure.
std::string read_names(const fs::path& dir, std::vector<std::string>& names) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC | O_NOATIME);
  if (fd < 0 && errno == EPERM) fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) return std::error_code(errno, std::generic_category()).message();
  DIR* d = ::fdopendir(fd);
  if (!d) {
    const int e = errno;
    ::close(fd);
    return std::error_code(e, std::generic_category()).message();
  }
  errno = 0;
  while (const dirent* ent = ::readdir(d)) {
    const std::string_view n = ent->d_name;
    if (n != "." && n != "..") names.emplace_back(n);
  }
  const int e = errno;
  ::closedir(d);
  return e ? std::error_code(e, std::generic_category()).message() : std::string();
}

// Shared work queue of directories; workers pull a directory, list it
// locally, then merge results under the lock.
class Walker {
 public:
  Walker(fs::path root, const ScanOptions& opts, dev_t root_dev)
      : root_(std::move(root)), opts_(opts), root_dev_(root_dev) {}

  void run(unsigned workers, dev_t dev, ino_t ino) {
    visited_.insert({dev, ino});
    pending_.push_back("");
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < std::max(1u, workers); ++i) pool.emplace_back([this] { loop(); });
    for (auto& t : pool) t.join();
  }

  std::vector<ScanItem> items;
  std::vector<std::string> warnings;

 private:
  void loop() {
    for (;;) {
      std::string dir;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return !pending_.empty() || busy_ == 0; });
        if (pending_.empty()) return;
        dir = std::move(pending_.front());
        pending_.pop_front();
        ++busy_;
      }
      std::vector<ScanItem> found;
      std::vector<std::string> notes;
      std::vector<std::string> subdirs;
      list_directory(dir, found, notes, subdirs);
      {
        std::lock_guard lock(mu_);
        std::move(found.begin(), found.end(), std::back_inserter(items));
        std::move(notes.begin(), notes.end(), std::back_inserter(warnings));
        for (auto& s : subdirs) pending_.push_back(std::move(s));
        --busy_;
      }
      cv_.notify_all();
    }
  }

  bool first_visit(dev_t dev, ino_t ino) {
    std::lock_guard lock(mu_);
    return visited_.insert({dev, ino}).second;
  }

  void list_directory(const std::string& rel_dir, std::vector<ScanItem>& found,
                      std::vector<std::string>& notes, std::vector<std::string>& subdirs) {
    const fs::path abs_dir = rel_dir.empty() ? root_ : root_ / rel_dir;
    std::vector<std::string> names;
    if (const auto error = read_names(abs_dir, names); !error.empty()) {
      notes.push_back("skipped unreadable directory '" + (rel_dir.empty() ? "." : rel_dir) + "': " + error);
      return;
    }
    for (const auto& name : names) {
      const std::string rel = rel_dir.empty() ? name : rel_dir + "/" + name;
      if (matches_any(opts_.exclude_globs, rel)) continue;

      const fs::path abs = abs_dir / name;
      struct stat st {};
      if (::lstat(abs.c_str(), &st) != 0) {
        notes.push_back("cannot stat '" + rel + "'");
        continue;
      }
      bool is_link = S_ISLNK(st.st_mode);
      if (is_link && opts_.follow_symlinks) {
        struct stat target {};
        if (::stat(abs.c_str(), &target) == 0) {
          st = target;
          is_link = false;
        }
      }

      ScanItem item;
      item.dev = st.st_dev;
      item.ino = st.st_ino;
      FileRecord& r = item.record;
      r.path = rel;
      r.mtime = st.st_mtim.tv_sec;
      r.atime = st.st_atim.tv_sec;
      if (r.mtime < 0 || r.atime < 0) {
        notes.push_back("negative timestamp clamped to 0 for '" + rel + "'");
        r.mtime = std::max<std::int64_t>(r.mtime, 0);
        r.atime = std::max<std::int64_t>(r.atime, 0);
      }

      if (is_link) {
        r.kind = FileKind::Symlink;
        r.size_bytes = static_cast<std::uint64_t>(st.st_size);
      } else if (S_ISREG(st.st_mode)) {
        r.kind = FileKind::Regular;
        r.size_bytes = static_cast<std::uint64_t>(st.st_size);
        const auto allocated = static_cast<std::uint64_t>(st.st_blocks) * 512u;
        if (allocated < r.size_bytes) r.allocated_bytes = allocated;
      } else if (S_ISDIR(st.st_mode)) {
        r.kind = FileKind::Directory;
        const bool crosses = opts_.one_filesystem && st.st_dev != root_dev_;
        if (!crosses && first_visit(st.st_dev, st.st_ino)) subdirs.push_back(rel);
      } else {
        r.kind = FileKind::Other;
      }
      found.push_back(std::move(item));
    }
  }

  fs::path root_;
  const ScanOptions& opts_;
  dev_t root_dev_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> pending_;
  std::set<std::pair<dev_t, ino_t>> visited_;
  unsigned busy_ = 0;
};

json record_to_json(const FileRecord& r) {
  json j = {{"path", r.path},
            {"size", r.size_bytes},
            {"mtime", r.mtime},
            {"atime", r.atime},
            {"kind", std::string(to_string(r.kind))}};
  if (r.allocated_bytes) j["allocated"] = *r.allocated_bytes;
  if (r.hardlink_of) j["hardlink_of"] = *r.hardlink_of;
  return j;
}

FileRecord record_from_json(const json& j) {
  FileRecord r;
  r.path = j.at("path").get<std::string>();
  r.size_bytes = j.at("size").get<std::uint64_t>();
  r.mtime = j.at("mtime").get<std::int64_t>();
  r.atime = j.at("atime").get<std::int64_t>();
  r.kind = parse_file_kind(j.at("kind").get<std::string>());
  if (j.contains("allocated")) r.allocated_bytes = j.at("allocated").get<std::uint64_t>();
  if (j.contains("hardlink_of")) r.hardlink_of = j.at("hardlink_of").get<std::string>();
  return r;
}

double pct(std::uint64_t part, std::uint64_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

Snapshot scan(const fs::path& root, const ScanOptions& options) {
  std::error_code ec;
  const fs::path abs = fs::canonical(root, ec);
  if (ec) throw DomainError("scan root '" + root.string() + "' does not exist");
  struct stat st {};
  if (::stat(abs.c_str(), &st) != 0 || !S_ISDIR(st.st_mode))
    throw DomainError("scan root '" + root.string() + "' is not a directory");

  Snapshot snap;
  snap.root = abs.string();
  snap.taken_at = options.taken_at.value_or(static_cast<std::int64_t>(std::time(nullptr)));
  snap.tool_version = WASTEDATA_VERSION;

  struct statvfs vfs {};
  if (::statvfs(abs.c_str(), &vfs) == 0 && (vfs.f_flag & ST_NOATIME)) {
    snap.atime_reliable = false;
    snap.warnings.push_back("filesystem mounted noatime; access times are not maintained");
  }

  Walker walker(abs, options, st.st_dev);
  walker.run(options.workers, st.st_dev, st.st_ino);

  auto& items = walker.items;
  std::sort(items.begin(), items.end(),
            [](const ScanItem& a, const ScanItem& b) { return a.record.path < b.record.path; });

  std::map<std::pair<dev_t, ino_t>, std::string> first_link;
  std::uint64_t future = 0;
  snap.records.reserve(items.size());
  for (auto& item : items) {
    FileRecord& r = item.record;
    if (r.kind == FileKind::Regular) {
      auto [pos, inserted] = first_link.try_emplace({item.dev, item.ino}, r.path);
      if (!inserted) {
        r.hardlink_of = pos->second;
        r.size_bytes = 0;
        r.allocated_bytes.reset();
      }
    }
    if (r.mtime > snap.taken_at || r.atime > snap.taken_at) ++future;
    snap.records.push_back(std::move(r));
  }
  if (future > 0)
    walker.warnings.push_back(std::to_string(future) + " records have timestamps after taken_at");
  std::sort(walker.warnings.begin(), walker.warnings.end());
  snap.warnings.insert(snap.warnings.end(), walker.warnings.begin(), walker.warnings.end());
  return snap;
}

void write_snapshot(const Snapshot& s, std::ostream& out) {
  json header = {{"format", std::string(kSnapshotFormat)},
                 {"root", s.root},
                 {"taken_at", s.taken_at},
                 {"tool_version", s.tool_version},
                 {"atime_reliable", s.atime_reliable},
                 {"warnings", s.warnings}};
  out << header.dump() << '\n';
  for (const auto& r : s.records) out << record_to_json(r).dump() << '\n';
}

void write_snapshot(const Snapshot& s, const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DomainError("cannot write snapshot to " + file.string());
  write_snapshot(s, out);
  if (!out) throw DomainError("write failed for " + file.string());
}

Snapshot read_snapshot(std::istream& in) {
  Snapshot s;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json j = json::parse(line);
      if (!have_header) {
        if (j.value("format", "") != kSnapshotFormat)
          throw DomainError("not a snapshot file (missing header)");
        s.root = j.at("root").get<std::string>();
        s.taken_at = j.at("taken_at").get<std::int64_t>();
        s.tool_version = j.value("tool_version", "");
        s.atime_reliable = j.value("atime_reliable", true);
        s.warnings = j.value("warnings", std::vector<std::string>{});
        have_header = true;
      } else {
        s.records.push_back(record_from_json(j));
      }
    }
  } catch (const json::exception& e) {
    throw DomainError("snapshot line " + std::to_string(lineno) + ": " + e.what());
  }
  if (!have_header) throw DomainError("empty snapshot file");
  validate(s);
  return s;
}

Snapshot read_snapshot(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DomainError("cannot open snapshot " + file.string());
  return read_snapshot(in);
}

void validate(const Snapshot& s) {
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    validate(s.records[i]);
    if (i > 0 && !(s.records[i - 1].path < s.records[i].path))
      throw DomainError("snapshot records not strictly sorted at '" + s.records[i].path + "'");
  }
}

double WasteReport::category_byte_share_pct(WasteCategory c) const {
  auto it = per_category.find(c);
  return it == per_category.end() ? 0.0 : pct(it->second.bytes, total_bytes);
}

WasteReport report(const Snapshot& snapshot, const RuleSet& rules) {
  return report(snapshot, rules, file_digest_probe(snapshot.root));
}

WasteReport report(const Snapshot& snapshot, const RuleSet& rules, const DigestProbe& probe) {
  WasteReport rep;
  for (auto c : kAllCategories) rep.per_category[c] = {};
  rep.warnings = snapshot.warnings;

  std::uint64_t clamped = 0;
  for (const auto& r : snapshot.records) {
    if (r.kind != FileKind::Regular) continue;
    ++rep.total_files;
    rep.total_bytes += r.size_bytes;
    if (f_lifetime(r).seconds == 0) {
      ++rep.never_accessed_files;
      rep.never_accessed_bytes += r.size_bytes;
    }
    if (r.atime < r.mtime) ++clamped;
    auto& tally = rep.per_category[classify(r, rules, snapshot.taken_at, probe).category];
    ++tally.files;
    tally.bytes += r.size_bytes;
  }
  rep.never_accessed_files_pct = pct(rep.never_accessed_files, rep.total_files);
  rep.never_accessed_space_pct = pct(rep.never_accessed_bytes, rep.total_bytes);

  if (!snapshot.atime_reliable)
    rep.warnings.push_back("atime unreliable: never-accessed figures are upper bounds");
  if (clamped > 0)
    rep.warnings.push_back("atime unreliable: " + std::to_string(clamped) +
                           " files have atime before mtime; f-lifetime clamped to 0");
  return rep;
}

json to_json(const WasteReport& r) {
  json cats = json::object();
  for (const auto& [c, t] : r.per_category)
    cats[std::string(to_string(c))] = {{"files", t.files}, {"bytes", t.bytes}};
  return {{"total_files", r.total_files},
          {"total_bytes", r.total_bytes},
          {"never_accessed_files", r.never_accessed_files},
          {"never_accessed_bytes", r.never_accessed_bytes},
          {"never_accessed_files_pct", r.never_accessed_files_pct},
          {"never_accessed_space_pct", r.never_accessed_space_pct},
          {"per_category", cats},
          {"warnings", r.warnings}};
}

std::string format_table(const WasteReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  os << "regular files      " << r.total_files << " (" << r.total_bytes << " bytes)\n";
  os << "% of files         " << r.never_accessed_files_pct << "  (never accessed since last modification)\n";
  os << "% of used space    " << r.never_accessed_space_pct << '\n';
  os << '\n' << std::left << std::setw(16) << "category" << std::right << std::setw(10) << "files"
     << std::setw(16) << "bytes" << std::setw(9) << "bytes %" << '\n';
  for (const auto& [c, t] : r.per_category) {
    os << std::left << std::setw(16) << to_string(c) << std::right << std::setw(10) << t.files
       << std::setw(16) << t.bytes << std::setw(9) << pct(t.bytes, r.total_bytes) << '\n';
  }
  for (const auto& w : r.warnings) os << "warning: " << w << '\n';
  return os.str();
}

ChurnReport diff(const Snapshot& before, const Snapshot& after, const RuleSet* rules) {
  if (!rules) {
    if (before.root != after.root)
      throw DomainError("cannot diff snapshots of different roots: " + before.root + " vs " +
                        after.root);
    ChurnReport out;
    std::vector<std::string> a, b;
    for (const auto& r : before.records) a.push_back(r.path);
    for (const auto& r : after.records) b.push_back(r.path);
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(out.added));
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out.removed));
    return out;
  }
  return diff(before, after, *rules, file_digest_probe(before.root), file_digest_probe(after.root));
}

ChurnReport diff(const Snapshot& before, const Snapshot& after, const RuleSet& rules,
                 const DigestProbe& before_probe, const DigestProbe& after_probe) {
  ChurnReport out = diff(before, after, nullptr);
  out.classified = true;
  // Both record lists are sorted by path: walk them in step.
  auto i = before.records.begin();
  auto j = after.records.begin();
  while (i != before.records.end() && j != after.records.end()) {
    if (i->path < j->path) {
      ++i;
    } else if (j->path < i->path) {
      ++j;
    } else {
      const bool was = is_waste(classify(*i, rules, before.taken_at, before_probe).category);
      const bool now = is_waste(classify(*j, rules, after.taken_at, after_probe).category);
      if (!was && now) out.became_waste.push_back(i->path);
      if (was && !now) out.reactivated.push_back(i->path);
      ++i;
      ++j;
    }
  }
  return out;
}

json to_json(const ChurnReport& r) {
  return {{"added", r.added},
          {"removed", r.removed},
          {"became_waste", r.became_waste},
          {"reactivated", r.reactivated},
          {"classified", r.classified}};
}

}  // namespace wastedata
