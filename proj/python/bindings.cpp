#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wastedata/dedup.hpp"
#include "wastedata/errors.hpp"
#include "wastedata/hierarchy.hpp"
#include "wastedata/landfill.hpp"
#include "wastedata/penalty.hpp"
#include "wastedata/recover.hpp"
#include "wastedata/scanner.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace wastedata;

// Structured values cross the boundary as JSON text; the Python package
// decodes them.

namespace {

Snapshot snapshot_from(const std::string& text) {
  std::istringstream in(text);
  return read_snapshot(in);
}

RuleSet rules_from(const std::string& text) { return RuleSet::from_json(json::parse(text)); }

FileRecord record(std::string path, std::uint64_t size, std::int64_t mtime, std::int64_t atime,
                  const std::string& kind) {
  FileRecord r;
  r.path = std::move(path);
  r.size_bytes = size;
  r.mtime = mtime;
  r.atime = atime;
  r.kind = parse_file_kind(kind);
  validate(r);
  return r;
}

std::string landfill_put_result(PutResult r) { return r == PutResult::Stored ? "stored" : "rejected_too_large"; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Waste-data analysis core";
  m.attr("__version__") = WASTEDATA_VERSION;

  auto domain = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NotFoundError>(m, "NotFoundError", domain.ptr());
  py::register_exception<CorruptionError>(m, "CorruptionError", domain.ptr());

  m.def(
      "f_lifetime",
      [](std::int64_t mtime, std::int64_t atime) { return f_lifetime(record("f", 0, mtime, atime, "regular")).seconds; },
      py::arg("mtime"), py::arg("atime"));

  m.def(
      "classify",
      [](const std::string& path, std::uint64_t size, std::int64_t mtime, std::int64_t atime,
         const std::string& rules, std::int64_t now, const std::string& kind) {
        // Digest checks see the file as unreadable: there is no root here.
        const auto c = classify(record(path, size, mtime, atime, kind), rules_from(rules), now, nullptr);
        return py::make_tuple(std::string(to_string(c.category)), c.reason);
      },
      py::arg("path"), py::arg("size"), py::arg("mtime"), py::arg("atime"), py::arg("rules"), py::arg("now"),
      py::arg("kind") = "regular");

  m.def(
      "scan",
      [](const std::string& root, bool follow_symlinks, bool one_filesystem, std::vector<std::string> exclude,
         unsigned workers, std::optional<std::int64_t> taken_at) {
        ScanOptions o;
        o.follow_symlinks = follow_symlinks;
        o.one_filesystem = one_filesystem;
        for (auto& g : exclude) o.exclude_globs.emplace_back(std::move(g));
        o.workers = workers;
        o.taken_at = taken_at;
        std::ostringstream out;
        {
          py::gil_scoped_release release;
          write_snapshot(scan(root, o), out);
        }
        return out.str();
      },
      py::arg("root"), py::arg("follow_symlinks") = false, py::arg("one_filesystem") = false,
      py::arg("exclude") = std::vector<std::string>{}, py::arg("workers") = 1, py::arg("taken_at") = py::none());

  m.def(
      "report",
      [](const std::string& snapshot, const std::string& rules) {
        return to_json(report(snapshot_from(snapshot), rules_from(rules))).dump();
      },
      py::arg("snapshot"), py::arg("rules"));

  m.def(
      "diff",
      [](const std::string& before, const std::string& after, std::optional<std::string> rules) {
        const auto r = rules ? std::optional<RuleSet>(rules_from(*rules)) : std::nullopt;
        return to_json(diff(snapshot_from(before), snapshot_from(after), r ? &*r : nullptr)).dump();
      },
      py::arg("before"), py::arg("after"), py::arg("rules") = py::none());

  m.def(
      "plan",
      [](const std::string& snapshot, const std::string& rules, const std::string& masks, const std::string& device,
         std::optional<std::uint64_t> endurance, std::uint64_t erase_block) {
        const auto snap = snapshot_from(snapshot);
        const auto rs = rules_from(rules);
        const auto mc = MaskConfig::from_json(json::parse(masks));
        const auto probe = file_digest_probe(snap.root);
        std::vector<PlanInput> inputs;
        for (const auto& r : snap.records) {
          if (r.kind != FileKind::Regular) continue;
          const auto cat = classify(r, rs, snap.taken_at, probe).category;
          if (is_waste(cat)) inputs.push_back({r, cat, mc.resolve(r, cat)});
        }
        const auto p = plan(inputs);
        CostModel model;
        model.device_kind = parse_device_kind(device);
        model.device_endurance_cycles =
            endurance.value_or(model.device_kind == DeviceKind::SLC ? kSlcDefaultEndurance : kMlcDefaultEndurance);
        model.erase_block_bytes = erase_block;
        json doc = to_json(p);
        doc["cost"] = to_json(estimate_cost(p, model));
        doc["cost"]["device"] = std::string(to_string(model.device_kind));
        doc["cost"]["endurance_cycles"] = model.device_endurance_cycles;
        return doc.dump();
      },
      py::arg("snapshot"), py::arg("rules"), py::arg("masks"), py::arg("device") = "mlc",
      py::arg("endurance") = py::none(), py::arg("erase_block") = CostModel{}.erase_block_bytes);

  m.def(
      "select_action",
      [](bool reduce, bool reuse, bool recycle, bool recover) {
        return std::string(to_string(select_action({reduce, reuse, recycle, recover})));
      },
      py::arg("reduce") = false, py::arg("reuse") = false, py::arg("recycle") = false, py::arg("recover") = false);

  py::class_<Landfill>(m, "Landfill")
      .def(py::init([](std::uint64_t capacity, std::uint64_t fade, bool refresh) {
             return Landfill(LandfillConfig{capacity, fade, refresh});
           }),
           py::arg("capacity_bytes"), py::arg("fade_lifetime_epochs"), py::arg("refresh_on_read") = true)
      .def("put", [](Landfill& s, std::string key, py::bytes value) {
        return landfill_put_result(s.put(std::move(key), std::string(value)));
      })
      .def("get", [](Landfill& s, const std::string& key) -> std::optional<py::bytes> {
        auto v = s.get(key);
        if (!v) return std::nullopt;
        return py::bytes(*v);
      })
      .def("advance_epoch", [](Landfill& s, std::uint64_t n) {
        const auto f = s.advance_epoch(n);
        return py::make_tuple(f.entries_faded, f.bytes_reclaimed);
      })
      .def("last_access_epoch", &Landfill::last_access_epoch)
      .def("_stats_json", [](const Landfill& s) { return to_json(s.stats()).dump(); });

  m.def(
      "penalty_factor",
      [](const std::string& useful, const std::string& waste, const std::string& alpha) {
        ProducerAccount a;
        a.useful_bytes = parse_rational(useful);
        a.waste_bytes = parse_rational(waste);
        return to_string(penalty_factor(a, parse_rational(alpha)));
      },
      py::arg("useful_bytes"), py::arg("waste_bytes"), py::arg("alpha"));

  m.def(
      "allocate_shares",
      [](const std::vector<std::tuple<std::string, std::string, std::string, std::string>>& accounts,
         std::uint64_t bandwidth, const std::string& alpha) {
        std::vector<ProducerAccount> acc;
        for (const auto& [id, useful, waste, weight] : accounts) {
          ProducerAccount a;
          a.id = id;
          a.useful_bytes = parse_rational(useful);
          a.waste_bytes = parse_rational(waste);
          a.base_weight = parse_rational(weight);
          acc.push_back(std::move(a));
        }
        SchedulerConfig cfg;
        cfg.total_bandwidth = bandwidth;
        cfg.alpha = parse_rational(alpha);
        cfg.tick_count = 1;
        cfg.validate();
        return allocate_shares(acc, cfg);
      },
      py::arg("accounts"), py::arg("bandwidth"), py::arg("alpha"));

  m.def(
      "simulate",
      [](const std::string& trace, std::uint64_t bandwidth, const std::string& alpha, std::uint64_t ticks) {
        std::istringstream in(trace);
        SchedulerConfig cfg;
        cfg.total_bandwidth = bandwidth;
        cfg.alpha = parse_rational(alpha);
        cfg.tick_count = ticks;
        return to_json(simulate(WorkloadTrace::parse(in), cfg)).dump();
      },
      py::arg("trace"), py::arg("bandwidth"), py::arg("alpha"), py::arg("ticks"));

  m.def(
      "chunk",
      [](py::bytes data, std::size_t min_chunk, std::size_t target_chunk, std::size_t max_chunk, std::size_t window) {
        const std::string s(data);
        py::list out;
        for (const auto& c : chunk(s, ChunkingConfig{min_chunk, target_chunk, max_chunk, window})) out.append(py::bytes(c));
        return out;
      },
      py::arg("data"), py::arg("min_chunk") = ChunkingConfig{}.min_chunk,
      py::arg("target_chunk") = ChunkingConfig{}.target_chunk, py::arg("max_chunk") = ChunkingConfig{}.max_chunk,
      py::arg("window") = ChunkingConfig{}.window);

  py::class_<ChunkStore>(m, "ChunkStore")
      .def(py::init([](std::size_t min_chunk, std::size_t target_chunk, std::size_t max_chunk, std::size_t window) {
             return ChunkStore(ChunkingConfig{min_chunk, target_chunk, max_chunk, window});
           }),
           py::arg("min_chunk") = ChunkingConfig{}.min_chunk, py::arg("target_chunk") = ChunkingConfig{}.target_chunk,
           py::arg("max_chunk") = ChunkingConfig{}.max_chunk, py::arg("window") = ChunkingConfig{}.window)
      .def("ingest", [](ChunkStore& s, const std::string& id, py::bytes data) {
        const auto r = s.ingest(id, std::string(data));
        return py::make_tuple(r.logical_bytes, r.physical_new_bytes);
      })
      .def("restore", [](const ChunkStore& s, const std::string& id) { return py::bytes(s.restore(id)); })
      .def("__contains__", &ChunkStore::contains)
      .def("verify_refcounts", &ChunkStore::verify_refcounts)
      .def("_stats_json", [](const ChunkStore& s) { return to_json(s.stats()).dump(); });

  m.def(
      "recover_summary",
      [](const std::string& snapshot, const std::string& rules) {
        return to_json(recover_summary(snapshot_from(snapshot), rules_from(rules))).dump();
      },
      py::arg("snapshot"), py::arg("rules"));
}
