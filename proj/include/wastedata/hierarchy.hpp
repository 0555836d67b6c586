#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wastedata/glob.hpp"
#include "wastedata/waste_model.hpp"

namespace wastedata {

// The five selectable rungs in preference order, plus two out-of-band
// markers: ZeroWaste sits above the ladder and PhysicalElimination below it.
// Neither marker is ever chosen by the planner.
enum class HierarchyAction { ZeroWaste, Reduce, Reuse, Recycle, Recover, Dispose, PhysicalElimination };

inline constexpr HierarchyAction kSelectableActions[] = {
    HierarchyAction::Reduce, HierarchyAction::Reuse, HierarchyAction::Recycle,
    HierarchyAction::Recover, HierarchyAction::Dispose};

// Reduce = 0 ... Dispose = 4. ZeroWaste is -1, PhysicalElimination 5.
constexpr int rank(HierarchyAction a) { return static_cast<int>(a) - 1; }
constexpr bool is_selectable(HierarchyAction a) {
  return a != HierarchyAction::ZeroWaste && a != HierarchyAction::PhysicalElimination;
}

std::string_view to_string(HierarchyAction a);
HierarchyAction parse_action(std::string_view s);

// Deletion is always possible, so there is no dispose flag to clear.
struct FeasibilityMask {
  bool reduce_ok = false;
  bool reuse_ok = false;
  bool recycle_ok = false;
  bool recover_ok = false;

  static constexpr bool dispose_ok() { return true; }
  bool allows(HierarchyAction a) const;
  bool operator==(const FeasibilityMask&) const = default;
};

// Feasible action of minimum rank.
HierarchyAction select_action(const FeasibilityMask& mask);

struct PlanInput {
  FileRecord record;
  WasteCategory category = WasteCategory::NotWaste;
  FeasibilityMask mask;
};

struct PlanEntry {
  std::string path;
  WasteCategory category = WasteCategory::NotWaste;
  HierarchyAction action = HierarchyAction::Dispose;
  // Bytes the action touches. Reduce acts on the producer, not the object,
  // so it touches none and carries a recommendation instead.
  std::uint64_t bytes_affected = 0;
  std::optional<std::string> recommendation;
};

struct ActionTotals {
  std::uint64_t files = 0;
  std::uint64_t bytes = 0;
};

struct ActionPlan {
  std::vector<PlanEntry> entries;
  std::map<HierarchyAction, ActionTotals> totals;
};

// One entry per input, in input order. Throws DomainError for a NotWaste
// input.
ActionPlan plan(std::span<const PlanInput> inputs);

nlohmann::json to_json(const ActionPlan& p);

enum class DeviceKind { MLC, SLC, Other };
std::string_view to_string(DeviceKind k);
DeviceKind parse_device_kind(std::string_view s);

inline constexpr std::uint64_t kMlcDefaultEndurance = 1'000;
inline constexpr std::uint64_t kMlcMaxEndurance = 10'000;
inline constexpr std::uint64_t kSlcDefaultEndurance = 100'000;

struct CostModel {
  std::uint64_t erase_block_bytes = 256 * 1024;
  std::uint64_t device_endurance_cycles = kMlcDefaultEndurance;
  DeviceKind device_kind = DeviceKind::MLC;
  double delete_cost_per_byte = 1.0;
  std::map<HierarchyAction, double> action_cost_weights = default_weights();

  static std::map<HierarchyAction, double> default_weights();
  static CostModel mlc(std::uint64_t endurance = kMlcDefaultEndurance);
  static CostModel slc(std::uint64_t endurance = kSlcDefaultEndurance);

  // Throws DomainError("invalid cost model: ...") on a zero erase block,
  // zero endurance or a negative weight.
  void validate() const;
};

struct CostReport {
  std::uint64_t bytes_erased = 0;
  std::uint64_t erase_cycles_consumed = 0;
  double endurance_fraction = 0.0;
  double energy_units = 0.0;
};

// Erase cycles count disposed bytes in whole erase blocks; write
// amplification is not modelled.
CostReport estimate_cost(const ActionPlan& plan, const CostModel& model);

nlohmann::json to_json(const CostReport& c);

// Per-object feasibility from a JSON config:
//   {"default": {...}, "categories": {"used": {...}}, "globs": [{"pattern": "*.log", ...}]}
// where each {...} may set reduce/reuse/recycle/recover to true or false.
// Later layers override earlier ones: default, then category, then each
// matching glob in file order.
class MaskConfig {
 public:
  static MaskConfig from_json(const nlohmann::json& j);
  static MaskConfig load(const std::filesystem::path& file);

  FeasibilityMask resolve(const FileRecord& record, WasteCategory category) const;

 private:
  struct Overlay {
    std::optional<bool> reduce, reuse, recycle, recover;
    void apply(FeasibilityMask& m) const;
  };
  static Overlay parse_overlay(const nlohmann::json& j);

  Overlay default_;
  std::map<WasteCategory, Overlay> by_category_;
  std::vector<std::pair<Glob, Overlay>> by_glob_;
};

}  // namespace wastedata
