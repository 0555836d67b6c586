#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

namespace wastedata {

// Exact arithmetic keeps shares, factors and conservation free of rounding
// drift; only integral byte shares are ever rounded.
using Rational = mpq_class;

// Accepts "3", "0.25", "-1.5" and "3/4". Throws DomainError otherwise.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
inline double to_double(const Rational& q) { return q.get_d(); }

struct ProducerAccount {
  std::string id;
  Rational useful_bytes{0};
  Rational waste_bytes{0};
  Rational base_weight{1};
};

struct SchedulerConfig {
  std::uint64_t total_bandwidth = 0;  // bytes per tick
  Rational alpha{0};
  std::uint64_t tick_count = 0;

  void validate() const;
};

// waste / max(1, useful + waste)
Rational waste_ratio(const ProducerAccount& a);

// 1 / (1 + alpha * waste_ratio), in (0, 1].
Rational penalty_factor(const ProducerAccount& account, const Rational& alpha);

// Unrounded bandwidth shares: total * w_i f_i / sum_j w_j f_j.
std::vector<Rational> fractional_shares(std::span<const ProducerAccount> accounts,
                                        const SchedulerConfig& config);

// Largest-remainder apportionment of `total` in proportion to positive
// weights. Ties in remainder go to the lower index. Sums to `total` exactly.
std::vector<std::uint64_t> apportion(std::uint64_t total, std::span<const Rational> weights);

// Integral shares keyed by producer id. Throws DomainError on an empty or
// duplicate-id account list.
std::map<std::string, std::uint64_t> allocate_shares(std::span<const ProducerAccount> accounts,
                                                     const SchedulerConfig& config);

struct TraceRow {
  std::uint64_t tick = 0;
  std::string producer;
  std::uint64_t requested_bytes = 0;
  Rational waste_fraction{0};
};

// Text form, one record per line:
//   <tick> <producer> <requested_bytes> <waste_fraction>
//   weight <producer> <base_weight>
// with '#' comments. Ticks start at 0.
struct WorkloadTrace {
  std::vector<TraceRow> rows;
  std::map<std::string, Rational> weights;

  static WorkloadTrace parse(std::istream& in);
  void validate() const;
  std::vector<std::string> producers() const;  // sorted ids
};

struct ProducerOutcome {
  std::string id;
  Rational base_weight{1};
  std::vector<std::uint64_t> delivered;  // per tick
  std::uint64_t total_requested = 0;
  std::uint64_t total_delivered = 0;
  std::uint64_t backlog = 0;  // undelivered at the end
  // Tick in which the last outstanding byte was delivered; empty while
  // anything is still queued or nothing was ever requested.
  std::optional<std::uint64_t> completion_tick;
  Rational useful_bytes{0};
  Rational waste_bytes{0};
  Rational final_factor{1};
};

struct SimulationReport {
  std::uint64_t ticks = 0;
  std::uint64_t total_bandwidth = 0;
  Rational alpha{0};
  std::vector<ProducerOutcome> producers;  // sorted by id
  std::vector<std::uint64_t> delivered_per_tick;
};

// Each tick: queue the trace's requests, compute shares from the accounts
// accumulated so far, deliver min(queued, share), hand unused share to the
// producers still waiting (repeating until none is left or nobody waits),
// then charge delivered bytes to the accounts at the waste fraction they
// were requested with. Unserved demand carries over.
SimulationReport simulate(const WorkloadTrace& trace, const SchedulerConfig& config);

nlohmann::json to_json(const SimulationReport& r);
std::string format_tick_table(const SimulationReport& r);

}  // namespace wastedata
