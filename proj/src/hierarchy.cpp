#include "wastedata/hierarchy.hpp"

#include <cmath>
#include <fstream>

#include "wastedata/errors.hpp"

namespace wastedata {

using nlohmann::json;

std::string_view to_string(HierarchyAction a) {
  switch (a) {
    case HierarchyAction::ZeroWaste: return "zero_waste";
    case HierarchyAction::Reduce: return "reduce";
    case HierarchyAction::Reuse: return "reuse";
    case HierarchyAction::Recycle: return "recycle";
    case HierarchyAction::Recover: return "recover";
    case HierarchyAction::Dispose: return "dispose";
    case HierarchyAction::PhysicalElimination: return "physical_elimination";
  }
  return "dispose";
}

HierarchyAction parse_action(std::string_view s) {
  for (auto a : {HierarchyAction::ZeroWaste, HierarchyAction::Reduce, HierarchyAction::Reuse,
                 HierarchyAction::Recycle, HierarchyAction::Recover, HierarchyAction::Dispose,
                 HierarchyAction::PhysicalElimination})
    if (to_string(a) == s) return a;
  throw DomainError("unknown hierarchy action '" + std::string(s) + "'");
}

bool FeasibilityMask::allows(HierarchyAction a) const {
  switch (a) {
    case HierarchyAction::Reduce: return reduce_ok;
    case HierarchyAction::Reuse: return reuse_ok;
    case HierarchyAction::Recycle: return recycle_ok;
    case HierarchyAction::Recover: return recover_ok;
    case HierarchyAction::Dispose: return dispose_ok();
    default: return false;
  }
}

HierarchyAction select_action(const FeasibilityMask& mask) {
  for (auto a : kSelectableActions)
    if (mask.allows(a)) return a;
  return HierarchyAction::Dispose;  // unreachable: dispose is always feasible
}

ActionPlan plan(std::span<const PlanInput> inputs) {
  ActionPlan out;
  out.entries.reserve(inputs.size());
  for (auto a : kSelectableActions) out.totals[a] = {};
  for (const auto& in : inputs) {
    if (in.category == WasteCategory::NotWaste)
      throw DomainError("plan: '" + in.record.path + "' is not waste");
    PlanEntry e;
    e.path = in.record.path;
    e.category = in.category;
    e.action = select_action(in.mask);
    if (e.action == HierarchyAction::Reduce) {
      e.recommendation = "suppress the producer of " + std::string(to_string(in.category)) +
                         " data like '" + in.record.path + "'";
    } else {
      e.bytes_affected = in.record.size_bytes;
    }
    auto& t = out.totals[e.action];
    ++t.files;
    t.bytes += e.bytes_affected;
    out.entries.push_back(std::move(e));
  }
  return out;
}

json to_json(const ActionPlan& p) {
  json entries = json::array();
  for (const auto& e : p.entries) {
    json j = {{"path", e.path},
              {"category", std::string(to_string(e.category))},
              {"action", std::string(to_string(e.action))},
              {"rank", rank(e.action)},
              {"bytes", e.bytes_affected}};
    if (e.recommendation) j["recommendation"] = *e.recommendation;
    entries.push_back(std::move(j));
  }
  json totals = json::object();
  for (const auto& [a, t] : p.totals)
    totals[std::string(to_string(a))] = {{"files", t.files}, {"bytes", t.bytes}};
  return {{"entries", entries}, {"totals", totals}};
}

std::string_view to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::MLC: return "mlc";
    case DeviceKind::SLC: return "slc";
    case DeviceKind::Other: return "other";
  }
  return "other";
}

DeviceKind parse_device_kind(std::string_view s) {
  if (s == "mlc") return DeviceKind::MLC;
  if (s == "slc") return DeviceKind::SLC;
  if (s == "other") return DeviceKind::Other;
  throw DomainError("unknown device kind '" + std::string(s) + "'");
}

std::map<HierarchyAction, double> CostModel::default_weights() {
  return {{HierarchyAction::Reduce, 0.0},
          {HierarchyAction::Reuse, 0.2},
          {HierarchyAction::Recycle, 0.3},
          {HierarchyAction::Recover, 0.4},
          {HierarchyAction::Dispose, 1.0}};
}

CostModel CostModel::mlc(std::uint64_t endurance) {
  CostModel m;
  m.device_kind = DeviceKind::MLC;
  m.device_endurance_cycles = endurance;
  return m;
}

CostModel CostModel::slc(std::uint64_t endurance) {
  CostModel m;
  m.device_kind = DeviceKind::SLC;
  m.device_endurance_cycles = endurance;
  return m;
}

void CostModel::validate() const {
  if (erase_block_bytes == 0) throw DomainError("invalid cost model: erase_block_bytes is 0");
  if (device_endurance_cycles == 0) throw DomainError("invalid cost model: zero endurance");
  if (!(delete_cost_per_byte >= 0.0))
    throw DomainError("invalid cost model: negative delete_cost_per_byte");
  for (const auto& [a, w] : action_cost_weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw DomainError("invalid cost model: bad weight for " + std::string(to_string(a)));
}

CostReport estimate_cost(const ActionPlan& plan, const CostModel& model) {
  model.validate();
  CostReport c;
  for (const auto& e : plan.entries) {
    if (e.action == HierarchyAction::Dispose) c.bytes_erased += e.bytes_affected;
    auto w = model.action_cost_weights.find(e.action);
    const double weight = w == model.action_cost_weights.end() ? 0.0 : w->second;
    c.energy_units += static_cast<double>(e.bytes_affected) * weight * model.delete_cost_per_byte;
  }
  c.erase_cycles_consumed =
      c.bytes_erased / model.erase_block_bytes + (c.bytes_erased % model.erase_block_bytes != 0);
  c.endurance_fraction = static_cast<double>(c.erase_cycles_consumed) /
                         static_cast<double>(model.device_endurance_cycles);
  return c;
}

json to_json(const CostReport& c) {
  return {{"bytes_erased", c.bytes_erased},
          {"erase_cycles_consumed", c.erase_cycles_consumed},
          {"endurance_fraction", c.endurance_fraction},
          {"energy_units", c.energy_units}};
}

void MaskConfig::Overlay::apply(FeasibilityMask& m) const {
  if (reduce) m.reduce_ok = *reduce;
  if (reuse) m.reuse_ok = *reuse;
  if (recycle) m.recycle_ok = *recycle;
  if (recover) m.recover_ok = *recover;
}

MaskConfig::Overlay MaskConfig::parse_overlay(const json& j) {
  if (!j.is_object()) throw DomainError("masks: overlay must be an object");
  Overlay o;
  for (const auto& [k, v] : j.items()) {
    if (k == "pattern") continue;
    if (!v.is_boolean()) throw DomainError("masks: '" + k + "' must be true or false");
    const bool b = v.get<bool>();
    if (k == "reduce") o.reduce = b;
    else if (k == "reuse") o.reuse = b;
    else if (k == "recycle") o.recycle = b;
    else if (k == "recover") o.recover = b;
    else if (k == "dispose") {
      if (!b) throw DomainError("masks: dispose is always feasible and cannot be disabled");
    } else throw DomainError("masks: unknown action '" + k + "'");
  }
  return o;
}

MaskConfig MaskConfig::from_json(const json& j) {
  if (!j.is_object()) throw DomainError("masks: document must be a JSON object");
  MaskConfig mc;
  for (const auto& [k, v] : j.items()) {
    if (k == "default") {
      mc.default_ = parse_overlay(v);
    } else if (k == "categories") {
      if (!v.is_object()) throw DomainError("masks: 'categories' must be an object");
      for (const auto& [name, ov] : v.items()) mc.by_category_[parse_category(name)] = parse_overlay(ov);
    } else if (k == "globs") {
      if (!v.is_array()) throw DomainError("masks: 'globs' must be an array");
      for (const auto& g : v) {
        if (!g.is_object() || !g.contains("pattern") || !g.at("pattern").is_string())
          throw DomainError("masks: glob overlay needs a string 'pattern'");
        mc.by_glob_.emplace_back(Glob(g.at("pattern").get<std::string>()), parse_overlay(g));
      }
    } else {
      throw DomainError("masks: unknown key '" + k + "'");
    }
  }
  return mc;
}

MaskConfig MaskConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DomainError("cannot open masks file " + file.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DomainError("masks file " + file.string() + ": " + e.what());
  }
}

FeasibilityMask MaskConfig::resolve(const FileRecord& record, WasteCategory category) const {
  FeasibilityMask m;
  default_.apply(m);
  if (auto it = by_category_.find(category); it != by_category_.end()) it->second.apply(m);
  for (const auto& [glob, overlay] : by_glob_)
    if (glob.matches(record.path)) overlay.apply(m);
  return m;
}

}  // namespace wastedata
