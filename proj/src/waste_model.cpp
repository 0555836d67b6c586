#include "wastedata/waste_model.hpp"

#include <fstream>

#include <json.hpp>

#include "wastedata/digest.hpp"
#include "wastedata/errors.hpp"

namespace wastedata {

using nlohmann::json;

std::string_view to_string(FileKind k) {
  switch (k) {
    case FileKind::Regular: return "regular";
    case FileKind::Directory: return "directory";
    case FileKind::Symlink: return "symlink";
    case FileKind::Other: return "other";
  }
  return "other";
}

FileKind parse_file_kind(std::string_view s) {
  if (s == "regular") return FileKind::Regular;
  if (s == "directory") return FileKind::Directory;
  if (s == "symlink") return FileKind::Symlink;
  if (s == "other") return FileKind::Other;
  throw DomainError("unknown file kind '" + std::string(s) + "'");
}

void validate(const FileRecord& r) {
  if (r.path.empty()) throw DomainError("file record with empty path");
  if (r.mtime < 0 || r.atime < 0)
    throw DomainError("file record '" + r.path + "' has a negative timestamp");
}

std::string_view to_string(WasteCategory c) {
  switch (c) {
    case WasteCategory::Unintentional: return "unintentional";
    case WasteCategory::Used: return "used";
    case WasteCategory::Degraded: return "degraded";
    case WasteCategory::Unwanted: return "unwanted";
    case WasteCategory::NotWaste: return "not_waste";
  }
  return "not_waste";
}

WasteCategory parse_category(std::string_view s) {
  for (auto c : kAllCategories)
    if (to_string(c) == s) return c;
  throw DomainError("unknown waste category '" + std::string(s) + "'");
}

FLifetime f_lifetime(const FileRecord& record) {
  if (record.kind != FileKind::Regular)
    throw DomainError("f-lifetime undefined for non-regular files");
  if (record.atime <= record.mtime) return FLifetime{0};
  return FLifetime{static_cast<std::uint64_t>(record.atime - record.mtime)};
}

namespace {

std::vector<Glob> read_globs(const json& j, const char* key) {
  std::vector<Glob> out;
  if (!j.contains(key)) return out;
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw DomainError(std::string("rules: '") + key + "' must be an array");
  for (const auto& p : arr) {
    if (!p.is_string()) throw DomainError(std::string("rules: '") + key + "' entries must be strings");
    out.emplace_back(p.get<std::string>());
  }
  return out;
}

json glob_list(const std::vector<Glob>& globs) {
  json arr = json::array();
  for (const auto& g : globs) arr.push_back(g.pattern());
  return arr;
}

}  // namespace

RuleSet RuleSet::from_json(const json& j) {
  if (!j.is_object()) throw DomainError("rules: document must be a JSON object");
  static const char* kKnown[] = {"not_waste_globs", "unintentional_globs", "unwanted_globs",
                                 "degraded_checks", "used_threshold_secs"};
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (auto* name : kKnown) known = known || k == name;
    if (!known) throw DomainError("rules: unknown key '" + k + "'");
  }

  RuleSet r;
  r.not_waste_globs = read_globs(j, "not_waste_globs");
  r.unintentional_globs = read_globs(j, "unintentional_globs");
  r.unwanted_globs = read_globs(j, "unwanted_globs");
  if (j.contains("degraded_checks")) {
    const auto& arr = j.at("degraded_checks");
    if (!arr.is_array()) throw DomainError("rules: 'degraded_checks' must be an array");
    for (const auto& c : arr) {
      if (!c.is_object() || !c.contains("glob") || !c.contains("sha256") ||
          !c.at("glob").is_string() || !c.at("sha256").is_string())
        throw DomainError("rules: degraded check needs string 'glob' and 'sha256'");
      r.degraded_checks.push_back({Glob(c.at("glob").get<std::string>()),
                                   c.at("sha256").get<std::string>()});
    }
  }
  if (!j.contains("used_threshold_secs") || !j.at("used_threshold_secs").is_number_integer())
    throw DomainError("rules: integer 'used_threshold_secs' is required");
  r.used_threshold_secs = j.at("used_threshold_secs").get<std::int64_t>();
  r.validate();
  return r;
}

RuleSet RuleSet::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DomainError("cannot open rules file " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DomainError("rules file " + file.string() + ": " + e.what());
  }
  return from_json(j);
}

json RuleSet::to_json() const {
  json checks = json::array();
  for (const auto& c : degraded_checks)
    checks.push_back({{"glob", c.glob.pattern()}, {"sha256", c.expected_sha256}});
  return {{"not_waste_globs", glob_list(not_waste_globs)},
          {"unintentional_globs", glob_list(unintentional_globs)},
          {"unwanted_globs", glob_list(unwanted_globs)},
          {"degraded_checks", checks},
          {"used_threshold_secs", used_threshold_secs}};
}

void RuleSet::validate() const {
  if (used_threshold_secs <= 0) throw DomainError("rules: used_threshold_secs must be > 0");
  for (const auto& c : degraded_checks)
    if (!is_sha256_hex(c.expected_sha256))
      throw DomainError("rules: digest for '" + c.glob.pattern() +
                        "' is not 64 lowercase hex characters");
}

WasteCategory resolve_precedence(const MatchMask& m) {
  if (m.not_waste) return WasteCategory::NotWaste;
  if (m.degraded) return WasteCategory::Degraded;
  if (m.unintentional) return WasteCategory::Unintentional;
  if (m.unwanted) return WasteCategory::Unwanted;
  if (m.used) return WasteCategory::Used;
  return WasteCategory::NotWaste;
}

DigestProbe file_digest_probe(std::filesystem::path root) {
  return [root = std::move(root)](const FileRecord& r) { return sha256_file_hex(root / r.path); };
}

Classification classify(const FileRecord& record, const RuleSet& rules, std::int64_t now,
                        const DigestProbe& probe) {
  if (matches_any(rules.not_waste_globs, record.path))
    return {WasteCategory::NotWaste, "allowlisted"};

  if (record.kind == FileKind::Regular) {
    std::optional<std::optional<std::string>> digest;  // read at most once
    for (const auto& check : rules.degraded_checks) {
      if (!check.glob.matches(record.path)) continue;
      if (!digest) digest = probe ? probe(record) : std::nullopt;
      if (!*digest) return {WasteCategory::Degraded, "unreadable"};
      if (**digest != check.expected_sha256)
        return {WasteCategory::Degraded, "digest mismatch for " + check.glob.pattern()};
    }
  }

  if (matches_any(rules.unintentional_globs, record.path))
    return {WasteCategory::Unintentional, "by-product pattern"};
  if (matches_any(rules.unwanted_globs, record.path))
    return {WasteCategory::Unwanted, "unwanted pattern"};

  if (record.kind == FileKind::Regular && f_lifetime(record).seconds > 0 &&
      now - record.atime > rules.used_threshold_secs)
    return {WasteCategory::Used, "idle since last access"};

  return {WasteCategory::NotWaste, ""};
}

}  // namespace wastedata
