#include "wastedata/cli.hpp"

#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wastedata/dedup.hpp"
#include "wastedata/errors.hpp"
#include "wastedata/fixtures.hpp"
#include "wastedata/hierarchy.hpp"
#include "wastedata/landfill.hpp"
#include "wastedata/penalty.hpp"
#include "wastedata/recover.hpp"
#include "wastedata/scanner.hpp"

namespace wastedata::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  bool json_output = false;
  int verbosity = 0;
  std::string config;
};

RuleSet resolve_rules(const std::string& flag, const Globals& g) {
  if (!flag.empty()) return RuleSet::load(flag);
  if (!g.config.empty()) return RuleSet::load(g.config);
  if (const char* env = std::getenv(kRulesEnv); env && *env) return RuleSet::load(env);
  throw UsageError(std::string("no rules file: pass --rules, --config or set ") + kRulesEnv);
}

std::optional<RuleSet> maybe_rules(const std::string& flag, const Globals& g) {
  if (flag.empty() && g.config.empty()) {
    const char* env = std::getenv(kRulesEnv);
    if (!env || !*env) return std::nullopt;
  }
  return resolve_rules(flag, g);
}

bool looks_like_snapshot(const fs::path& p) {
  std::ifstream in(p);
  std::string first;
  if (!std::getline(in, first)) return false;
  try {
    auto j = json::parse(first);
    return j.is_object() && j.value("format", "") == kSnapshotFormat;
  } catch (const json::exception&) {
    return false;
  }
}

// "/" or the top directory of a mounted filesystem.
bool is_filesystem_root(const fs::path& p) {
  std::error_code ec;
  const auto canon = fs::canonical(p, ec);
  if (ec) return false;
  if (canon == canon.root_path()) return true;
  struct stat self {}, parent {};
  if (::stat(canon.c_str(), &self) != 0 || ::stat(canon.parent_path().c_str(), &parent) != 0) return true;
  return self.st_dev != parent.st_dev;
}

void print_list(std::ostream& out, const char* title, const std::vector<std::string>& v) {
  out << title << " (" << v.size() << ")\n";
  for (const auto& s : v) out << "  " << s << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Waste-data analysis: classify scanned files, plan hierarchy actions and simulate "
               "landfill, penalty and dedup mechanisms.",
               "wastedata"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", WASTEDATA_VERSION);

  Globals g;
  app.add_flag("--json", g.json_output, "Emit JSON instead of a table");
  app.add_flag("-v,--verbose", g.verbosity, "Increase verbosity");
  app.add_option("--config", g.config, "Default rules file (else $" + std::string(kRulesEnv) + ")");

  // scan
  auto* scan_cmd = app.add_subcommand("scan", "Walk a directory tree and write a snapshot");
  std::string scan_root, scan_out;
  ScanOptions scan_opts;
  std::vector<std::string> scan_excludes;
  std::optional<std::int64_t> taken_at;
  scan_cmd->add_option("root", scan_root, "Directory to scan")->required();
  scan_cmd->add_option("-o,--output", scan_out, "Snapshot file (default: stdout)");
  scan_cmd->add_flag("--follow-symlinks", scan_opts.follow_symlinks, "Descend through symlinks");
  scan_cmd->add_flag("--one-filesystem", scan_opts.one_filesystem, "Stay on the root's filesystem");
  scan_cmd->add_option("--exclude", scan_excludes, "Glob of paths to skip (repeatable)");
  scan_cmd->add_option("--workers", scan_opts.workers, "Traversal threads")->check(CLI::Range(1u, 256u));
  scan_cmd->add_option("--taken-at", taken_at, "Snapshot time in epoch seconds (default: now)");

  // report
  auto* report_cmd = app.add_subcommand("report", "Never-accessed and per-category waste report");
  std::string report_snap, report_rules;
  report_cmd->add_option("snapshot", report_snap)->required();
  report_cmd->add_option("--rules", report_rules, "Rules file");

  // diff
  auto* diff_cmd = app.add_subcommand("diff", "Churn between two snapshots of one root");
  std::string diff_old, diff_new, diff_rules;
  diff_cmd->add_option("old", diff_old)->required();
  diff_cmd->add_option("new", diff_new)->required();
  diff_cmd->add_option("--rules", diff_rules, "Rules file; enables became_waste/reactivated");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Choose a hierarchy action for every waste file");
  std::string plan_snap, plan_rules, plan_masks, plan_device = "mlc";
  std::optional<std::uint64_t> plan_endurance;
  std::uint64_t plan_erase_block = CostModel{}.erase_block_bytes;
  bool plan_execute = false, plan_yes = false;
  plan_cmd->add_option("snapshot", plan_snap)->required();
  plan_cmd->add_option("--rules", plan_rules, "Rules file");
  plan_cmd->add_option("--masks", plan_masks, "Feasibility mask config")->required();
  plan_cmd->add_option("--device", plan_device, "mlc, slc or other")->check(CLI::IsMember({"mlc", "slc", "other"}));
  plan_cmd->add_option("--endurance", plan_endurance, "Write/erase cycles per cell");
  plan_cmd->add_option("--erase-block", plan_erase_block, "Erase block size in bytes");
  plan_cmd->add_flag("--execute", plan_execute, "Delete the files planned for disposal");
  plan_cmd->add_flag("--yes", plan_yes, "Confirm --execute");

  // landfill
  auto* landfill_cmd = app.add_subcommand("landfill", "Replay a trace against a digital landfill");
  std::string lf_trace, lf_log;
  LandfillConfig lf_config;
  bool lf_no_refresh = false;
  landfill_cmd->add_option("--trace", lf_trace, "Trace file (PUT/GET/ADV)")->required();
  landfill_cmd->add_option("--capacity", lf_config.capacity_bytes, "Capacity in bytes")->required();
  landfill_cmd->add_option("--fade", lf_config.fade_lifetime_epochs, "Fade lifetime in epochs")->required();
  landfill_cmd->add_flag("--no-refresh-on-read", lf_no_refresh, "Reads do not refresh entries");
  landfill_cmd->add_option("--log", lf_log, "Append an operation log here");

  // penalty-sim
  auto* penalty_cmd = app.add_subcommand("penalty-sim", "Simulate pay-as-you-throw bandwidth shares");
  std::string pen_trace, pen_alpha = "0";
  SchedulerConfig pen_config;
  bool pen_table = false;
  penalty_cmd->add_option("--trace", pen_trace, "Workload trace")->required();
  penalty_cmd->add_option("--alpha", pen_alpha, "Penalty strength (decimal or p/q)");
  penalty_cmd->add_option("--bandwidth", pen_config.total_bandwidth, "Bytes per tick")->required();
  penalty_cmd->add_option("--ticks", pen_config.tick_count, "Ticks to simulate")->required();
  penalty_cmd->add_flag("--table", pen_table, "Per-tick delivery table instead of JSON");

  // dedup
  auto* dedup_cmd = app.add_subcommand("dedup", "Measure chunk-level duplication in a tree or snapshot");
  std::string dedup_path;
  ChunkingConfig chunking;
  dedup_cmd->add_option("path", dedup_path, "Directory or snapshot file")->required();
  dedup_cmd->add_option("--min-chunk", chunking.min_chunk);
  dedup_cmd->add_option("--target-chunk", chunking.target_chunk);
  dedup_cmd->add_option("--max-chunk", chunking.max_chunk);
  dedup_cmd->add_option("--window", chunking.window);

  // recover
  auto* recover_cmd = app.add_subcommand("recover", "Anonymized histograms of the waste in a snapshot");
  std::string rec_snap, rec_rules;
  recover_cmd->add_option("snapshot", rec_snap)->required();
  recover_cmd->add_option("--rules", rec_rules, "Rules file");

  // fixture
  auto* fixture_cmd = app.add_subcommand("fixture", "Generate a synthetic measurement tree");
  std::string fx_kind, fx_dir, fx_platform = "macbook", fx_rules_out;
  fixture_cmd->add_option("kind", fx_kind, "never-accessed or build")->required()->check(CLI::IsMember({"never-accessed", "build"}));
  fixture_cmd->add_option("dir", fx_dir)->required();
  fixture_cmd->add_option("--platform", fx_platform, "macbook, desktop or server");
  fixture_cmd->add_option("--rules-out", fx_rules_out, "Write matching rules JSON here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << WASTEDATA_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (scan_cmd->parsed()) {
      for (auto& g_ : scan_excludes) scan_opts.exclude_globs.emplace_back(g_);
      scan_opts.taken_at = taken_at;
      const auto snap = scan(scan_root, scan_opts);
      if (scan_out.empty()) {
        write_snapshot(snap, out);
      } else {
        write_snapshot(snap, fs::path(scan_out));
        if (g.verbosity > 0) err << "wrote " << snap.records.size() << " records to " << scan_out << '\n';
      }
      for (const auto& w : snap.warnings) err << "warning: " << w << '\n';
    } else if (report_cmd->parsed()) {
      const auto rules = resolve_rules(report_rules, g);
      const auto rep = report(read_snapshot(fs::path(report_snap)), rules);
      if (g.json_output) out << to_json(rep).dump(2) << '\n';
      else out << format_table(rep);
    } else if (diff_cmd->parsed()) {
      const auto rules = maybe_rules(diff_rules, g);
      const auto d = diff(read_snapshot(fs::path(diff_old)), read_snapshot(fs::path(diff_new)),
                          rules ? &*rules : nullptr);
      if (g.json_output) {
        out << to_json(d).dump(2) << '\n';
      } else {
        print_list(out, "added", d.added);
        print_list(out, "removed", d.removed);
        if (d.classified) {
          print_list(out, "became waste", d.became_waste);
          print_list(out, "reactivated", d.reactivated);
        }
      }
    } else if (plan_cmd->parsed()) {
      if (plan_execute && !plan_yes) throw UsageError("--execute deletes files; add --yes to confirm");
      const auto rules = resolve_rules(plan_rules, g);
      const auto masks = MaskConfig::load(plan_masks);
      const auto snap = read_snapshot(fs::path(plan_snap));
      if (plan_execute && is_filesystem_root(snap.root))
        throw DomainError("refusing to execute a plan on filesystem root " + snap.root);

      const auto probe = file_digest_probe(snap.root);
      std::vector<PlanInput> inputs;
      for (const auto& r : snap.records) {
        if (r.kind != FileKind::Regular) continue;
        const auto cat = classify(r, rules, snap.taken_at, probe).category;
        if (is_waste(cat)) inputs.push_back({r, cat, masks.resolve(r, cat)});
      }
      const auto p = plan(inputs);

      CostModel model;
      model.device_kind = parse_device_kind(plan_device);
      model.device_endurance_cycles = plan_endurance.value_or(
          model.device_kind == DeviceKind::SLC ? kSlcDefaultEndurance : kMlcDefaultEndurance);
      model.erase_block_bytes = plan_erase_block;

      json doc = to_json(p);
      doc["cost"] = to_json(estimate_cost(p, model));
      doc["cost"]["device"] = std::string(to_string(model.device_kind));
      doc["cost"]["endurance_cycles"] = model.device_endurance_cycles;

      if (plan_execute) {
        std::uint64_t deleted = 0;
        std::vector<std::string> skipped;
        std::map<std::string, const FileRecord*> by_path;
        for (const auto& in : inputs) by_path[in.record.path] = &in.record;
        for (const auto& e : p.entries) {
          if (e.action != HierarchyAction::Dispose) continue;
          const FileRecord& r = *by_path.at(e.path);
          const fs::path target = fs::path(snap.root) / e.path;
          struct stat st {};
          // Only delete what is still the file that was scanned.
          if (::lstat(target.c_str(), &st) != 0 || !S_ISREG(st.st_mode) || st.st_mtim.tv_sec != r.mtime ||
              (!r.hardlink_of && static_cast<std::uint64_t>(st.st_size) != r.size_bytes) ||
              ::unlink(target.c_str()) != 0) {
            skipped.push_back(e.path);
            continue;
          }
          ++deleted;
        }
        doc["execution"] = {{"deleted", deleted}, {"skipped", skipped}};
      }
      out << doc.dump(2) << '\n';
    } else if (landfill_cmd->parsed()) {
      lf_config.refresh_on_read = !lf_no_refresh;
      std::ifstream trace_in(lf_trace);
      if (!trace_in) throw DomainError("cannot open trace " + lf_trace);
      const auto ops = parse_trace(trace_in);
      Landfill store(lf_config);
      std::ofstream log_out;
      if (!lf_log.empty()) {
        log_out.open(lf_log, std::ios::app);
        if (!log_out) throw DomainError("cannot open log " + lf_log);
        store.attach_log(&log_out);
      }
      for (const auto& op : ops) out << apply(store, op).dump() << '\n';
      out << json{{"final", to_json(store.stats())}}.dump() << '\n';
    } else if (penalty_cmd->parsed()) {
      pen_config.alpha = parse_rational(pen_alpha);
      std::ifstream trace_in(pen_trace);
      if (!trace_in) throw DomainError("cannot open workload " + pen_trace);
      const auto rep = simulate(WorkloadTrace::parse(trace_in), pen_config);
      if (pen_table) out << format_tick_table(rep);
      else out << to_json(rep).dump(2) << '\n';
    } else if (dedup_cmd->parsed()) {
      ChunkStore store(chunking);
      fs::path root;
      std::vector<std::string> files;
      const fs::path src(dedup_path);
      if (fs::is_directory(src)) {
        const auto snap = scan(src);
        root = snap.root;
        for (const auto& r : snap.records)
          if (r.kind == FileKind::Regular && !r.hardlink_of) files.push_back(r.path);
      } else if (looks_like_snapshot(src)) {
        const auto snap = read_snapshot(src);
        root = snap.root;
        for (const auto& r : snap.records)
          if (r.kind == FileKind::Regular && !r.hardlink_of) files.push_back(r.path);
      } else {
        throw DomainError("'" + dedup_path + "' is neither a directory nor a snapshot");
      }
      std::vector<std::string> unreadable;
      for (const auto& f : files) {
        std::ifstream in(root / f, std::ios::binary);
        if (!in) {
          unreadable.push_back(f);
          continue;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        store.ingest(f, ss.str());
      }
      json doc = to_json(store.stats());
      doc["unreadable"] = unreadable;
      doc["chunking"] = {{"min_chunk", chunking.min_chunk},
                         {"target_chunk", chunking.target_chunk},
                         {"max_chunk", chunking.max_chunk},
                         {"window", chunking.window}};
      out << doc.dump(2) << '\n';
    } else if (recover_cmd->parsed()) {
      const auto rules = resolve_rules(rec_rules, g);
      out << to_json(recover_summary(read_snapshot(fs::path(rec_snap)), rules)).dump(2) << '\n';
    } else if (fixture_cmd->parsed()) {
      const fs::path dir(fx_dir);
      fs::create_directories(dir);
      json rules;
      if (fx_kind == "never-accessed") {
        fixtures::build_tree(dir, fixtures::tree_spec_for(fixtures::platform(fx_platform)));
        rules = {{"unintentional_globs", {"*.aux", "*.bbl", "*.log", "*.o", "*.swp"}},
                 {"used_threshold_secs", 30LL * 86400}};
      } else {
        fixtures::build_build_tree(dir);
        rules = fixtures::build_tree_rules().to_json();
      }
      if (!fx_rules_out.empty()) {
        std::ofstream r(fx_rules_out);
        if (!r) throw DomainError("cannot write " + fx_rules_out);
        r << rules.dump(2) << '\n';
      }
      if (g.verbosity > 0) err << "fixture written to " << dir.string() << '\n';
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace wastedata::cli
