#include "wastedata/recover.hpp"

#include <bit>
#include <cctype>

namespace wastedata {

using nlohmann::json;

std::string extension_token(std::string_view path) {
  if (auto slash = path.rfind('/'); slash != std::string_view::npos) path.remove_prefix(slash + 1);
  const auto dot = path.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == path.size()) return std::string(kNoExtension);
  const auto ext = path.substr(dot + 1);
  if (ext.size() > kMaxExtensionLength) return std::string(kLongExtension);
  std::string out;
  for (unsigned char c : ext) {
    if (!std::isalnum(c)) return std::string(kLongExtension);
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string size_bucket(std::uint64_t bytes) {
  if (bytes == 0) return "0";
  return "2^" + std::to_string(std::bit_width(bytes) - 1);
}

std::string age_bucket(std::int64_t age_seconds) {
  constexpr std::int64_t kDay = 86400;
  const std::int64_t days = age_seconds < 0 ? 0 : age_seconds / kDay;
  if (days < 1) return "0-1d";
  if (days < 7) return "1-7d";
  if (days < 30) return "7-30d";
  if (days < 90) return "30-90d";
  if (days < 365) return "90-365d";
  if (days < 730) return "365-730d";
  return "730d+";
}

RecoverSummary recover_summary(const Snapshot& snapshot, const RuleSet& rules) {
  return recover_summary(snapshot, rules, file_digest_probe(snapshot.root));
}

RecoverSummary recover_summary(const Snapshot& snapshot, const RuleSet& rules, const DigestProbe& probe) {
  RecoverSummary s;
  for (const auto& r : snapshot.records) {
    if (r.kind != FileKind::Regular) continue;
    const auto cat = classify(r, rules, snapshot.taken_at, probe).category;
    if (!is_waste(cat)) continue;
    for (auto* bin : {&s.extensions[extension_token(r.path)], &s.size_buckets[size_bucket(r.size_bytes)],
                      &s.age_buckets[age_bucket(snapshot.taken_at - r.mtime)],
                      &s.categories[std::string(to_string(cat))]}) {
      ++bin->files;
      bin->bytes += r.size_bytes;
    }
  }
  return s;
}

json to_json(const RecoverSummary& s) {
  const auto hist = [](const std::map<std::string, HistogramBin>& m) {
    json j = json::object();
    for (const auto& [k, b] : m) j[k] = {{"files", b.files}, {"bytes", b.bytes}};
    return j;
  };
  return {{"extensions", hist(s.extensions)},
          {"size_buckets", hist(s.size_buckets)},
          {"age_buckets", hist(s.age_buckets)},
          {"categories", hist(s.categories)}};
}

}  // namespace wastedata
