#include "wastedata/penalty.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

#include "wastedata/errors.hpp"

namespace wastedata {

using nlohmann::json;

Rational parse_rational(std::string_view text) {
  const std::string s(text);
  const auto bad = [&] { return DomainError("'" + s + "' is not a rational number"); };
  if (s.empty()) throw bad();

  std::size_t i = 0;
  bool negative = false;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    i = 1;
  }
  const std::string body = s.substr(i);
  if (body.empty()) throw bad();

  Rational q;
  if (auto slash = body.find('/'); slash != std::string::npos) {
    const std::string num = body.substr(0, slash), den = body.substr(slash + 1);
    if (num.empty() || den.empty() || num.find_first_not_of("0123456789") != std::string::npos ||
        den.find_first_not_of("0123456789") != std::string::npos)
      throw bad();
    mpz_class d(den);
    if (d == 0) throw DomainError("'" + s + "' has a zero denominator");
    q = Rational(mpz_class(num), d);
  } else {
    const auto dot = body.find('.');
    std::string whole = body.substr(0, dot);
    std::string frac = dot == std::string::npos ? "" : body.substr(dot + 1);
    if ((whole.empty() && frac.empty()) ||
        whole.find_first_not_of("0123456789") != std::string::npos ||
        frac.find_first_not_of("0123456789") != std::string::npos)
      throw bad();
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    q = Rational(mpz_class(whole.empty() ? "0" : whole) * den + mpz_class(frac.empty() ? "0" : frac), den);
  }
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

void SchedulerConfig::validate() const {
  if (total_bandwidth == 0) throw DomainError("scheduler: total_bandwidth must be > 0");
  if (alpha < 0) throw DomainError("scheduler: alpha must be >= 0");
  if (tick_count == 0) throw DomainError("scheduler: tick_count must be > 0");
}

Rational waste_ratio(const ProducerAccount& a) {
  Rational total = a.useful_bytes + a.waste_bytes;
  if (total < 1) total = 1;
  return Rational(a.waste_bytes / total);
}

Rational penalty_factor(const ProducerAccount& account, const Rational& alpha) {
  if (alpha < 0) throw DomainError("penalty: alpha must be >= 0");
  return Rational(1 / (1 + alpha * waste_ratio(account)));
}

namespace {

void check_accounts(std::span<const ProducerAccount> accounts) {
  if (accounts.empty()) throw DomainError("allocate_shares: no producer accounts");
  std::set<std::string_view> ids;
  for (const auto& a : accounts) {
    if (!ids.insert(a.id).second) throw DomainError("allocate_shares: duplicate producer '" + a.id + "'");
    if (a.base_weight <= 0) throw DomainError("producer '" + a.id + "': base_weight must be > 0");
  }
}

std::vector<Rational> effective_weights(std::span<const ProducerAccount> accounts, const Rational& alpha) {
  std::vector<Rational> w;
  w.reserve(accounts.size());
  for (const auto& a : accounts) w.emplace_back(a.base_weight * penalty_factor(a, alpha));
  return w;
}

}  // namespace

std::vector<Rational> fractional_shares(std::span<const ProducerAccount> accounts,
                                        const SchedulerConfig& config) {
  check_accounts(accounts);
  const auto w = effective_weights(accounts, config.alpha);
  Rational sum = std::accumulate(w.begin(), w.end(), Rational(0));
  std::vector<Rational> out;
  out.reserve(w.size());
  for (const auto& x : w) out.emplace_back(Rational(config.total_bandwidth) * x / sum);
  return out;
}

std::vector<std::uint64_t> apportion(std::uint64_t total, std::span<const Rational> weights) {
  if (weights.empty()) throw DomainError("apportion: no weights");
  Rational sum = 0;
  for (const auto& w : weights) {
    if (w <= 0) throw DomainError("apportion: weights must be positive");
    sum += w;
  }
  std::vector<std::uint64_t> seats(weights.size());
  std::vector<Rational> remainder(weights.size());
  std::uint64_t given = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const Rational quota = Rational(total) * weights[i] / sum;
    mpz_class floor_q;
    mpz_fdiv_q(floor_q.get_mpz_t(), quota.get_num_mpz_t(), quota.get_den_mpz_t());
    seats[i] = floor_q.get_ui();
    remainder[i] = quota - Rational(floor_q);
    given += seats[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; given < total; ++k, ++given) ++seats[order[k]];
  return seats;
}

std::map<std::string, std::uint64_t> allocate_shares(std::span<const ProducerAccount> accounts,
                                                     const SchedulerConfig& config) {
  check_accounts(accounts);
  const auto seats = apportion(config.total_bandwidth, effective_weights(accounts, config.alpha));
  std::map<std::string, std::uint64_t> out;
  for (std::size_t i = 0; i < accounts.size(); ++i) out[accounts[i].id] = seats[i];
  return out;
}

WorkloadTrace WorkloadTrace::parse(std::istream& in) {
  WorkloadTrace t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string s; ls >> s;) tok.push_back(s);
    if (tok.empty()) continue;
    const auto where = "workload line " + std::to_string(lineno) + ": ";
    try {
      if (tok[0] == "weight") {
        if (tok.size() != 3) throw DomainError("expected 'weight <producer> <weight>'");
        Rational w = parse_rational(tok[2]);
        if (w <= 0) throw DomainError("weight must be > 0");
        t.weights[tok[1]] = w;
        continue;
      }
      if (tok.size() != 4) throw DomainError("expected '<tick> <producer> <requested_bytes> <waste_fraction>'");
      for (int k : {0, 2})
        if (tok[k].find_first_not_of("0123456789") != std::string::npos)
          throw DomainError("'" + tok[k] + "' is not a non-negative integer");
      TraceRow row;
      row.tick = std::stoull(tok[0]);
      row.producer = tok[1];
      row.requested_bytes = std::stoull(tok[2]);
      row.waste_fraction = parse_rational(tok[3]);
      if (row.waste_fraction < 0 || row.waste_fraction > 1)
        throw DomainError("waste fraction must lie in [0, 1]");
      t.rows.push_back(std::move(row));
    } catch (const DomainError& e) {
      throw DomainError(where + e.what());
    } catch (const std::out_of_range&) {
      throw DomainError(where + "number out of range");
    }
  }
  return t;
}

void WorkloadTrace::validate() const {
  for (const auto& r : rows) {
    if (r.producer.empty()) throw DomainError("workload: empty producer id");
    if (r.waste_fraction < 0 || r.waste_fraction > 1)
      throw DomainError("workload: waste fraction outside [0, 1] for '" + r.producer + "'");
  }
  for (const auto& [id, w] : weights)
    if (w <= 0) throw DomainError("workload: weight for '" + id + "' must be > 0");
}

std::vector<std::string> WorkloadTrace::producers() const {
  std::set<std::string> ids;
  for (const auto& r : rows) ids.insert(r.producer);
  for (const auto& [id, _] : weights) ids.insert(id);
  return {ids.begin(), ids.end()};
}

namespace {

struct Segment {
  std::uint64_t bytes;
  Rational waste_fraction;
};

struct ProducerState {
  ProducerAccount account;
  std::deque<Segment> queue;
  std::uint64_t queued = 0;
};

}  // namespace

SimulationReport simulate(const WorkloadTrace& trace, const SchedulerConfig& config) {
  config.validate();
  trace.validate();
  for (const auto& r : trace.rows)
    if (r.tick >= config.tick_count)
      throw DomainError("workload tick " + std::to_string(r.tick) + " is beyond tick_count " +
                        std::to_string(config.tick_count));

  const auto ids = trace.producers();
  const std::size_t n = ids.size();
  std::map<std::string, std::size_t> index;
  std::vector<ProducerState> state(n);
  SimulationReport rep;
  rep.ticks = config.tick_count;
  rep.total_bandwidth = config.total_bandwidth;
  rep.alpha = config.alpha;
  rep.producers.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    index[ids[i]] = i;
    state[i].account.id = ids[i];
    if (auto w = trace.weights.find(ids[i]); w != trace.weights.end()) state[i].account.base_weight = w->second;
    rep.producers[i].id = ids[i];
    rep.producers[i].base_weight = state[i].account.base_weight;
    rep.producers[i].delivered.assign(config.tick_count, 0);
  }

  std::vector<std::vector<const TraceRow*>> by_tick(config.tick_count);
  for (const auto& r : trace.rows) by_tick[r.tick].push_back(&r);

  rep.delivered_per_tick.assign(config.tick_count, 0);
  for (std::uint64_t t = 0; t < config.tick_count; ++t) {
    for (const TraceRow* r : by_tick[t]) {
      auto& s = state[index[r->producer]];
      if (r->requested_bytes == 0) continue;
      s.queue.push_back({r->requested_bytes, r->waste_fraction});
      s.queued += r->requested_bytes;
      rep.producers[index[r->producer]].total_requested += r->requested_bytes;
    }
    if (n == 0) continue;

    std::vector<Rational> weight(n);
    for (std::size_t i = 0; i < n; ++i)
      weight[i] = state[i].account.base_weight * penalty_factor(state[i].account, config.alpha);

    // First round over every account, later rounds over those still waiting.
    std::vector<std::uint64_t> give(n, 0);
    std::vector<std::size_t> members(n);
    std::iota(members.begin(), members.end(), 0);
    std::uint64_t pool = config.total_bandwidth;
    while (pool > 0 && !members.empty()) {
      std::vector<Rational> w;
      for (auto i : members) w.push_back(weight[i]);
      const auto seats = apportion(pool, w);
      std::uint64_t unused = 0;
      std::vector<std::size_t> hungry;
      for (std::size_t k = 0; k < members.size(); ++k) {
        const auto i = members[k];
        const std::uint64_t need = state[i].queued - give[i];
        const std::uint64_t take = std::min(need, seats[k]);
        give[i] += take;
        unused += seats[k] - take;
        if (state[i].queued > give[i]) hungry.push_back(i);
      }
      pool = unused;
      members = std::move(hungry);
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (give[i] == 0) continue;
      auto& s = state[i];
      auto& out = rep.producers[i];
      std::uint64_t left = give[i];
      while (left > 0) {
        Segment& seg = s.queue.front();
        const std::uint64_t take = std::min(left, seg.bytes);
        const Rational bytes(take);
        s.account.waste_bytes += bytes * seg.waste_fraction;
        s.account.useful_bytes += bytes * (1 - seg.waste_fraction);
        seg.bytes -= take;
        left -= take;
        if (seg.bytes == 0) s.queue.pop_front();
      }
      s.queued -= give[i];
      out.delivered[t] = give[i];
      out.total_delivered += give[i];
      rep.delivered_per_tick[t] += give[i];
      if (s.queued == 0) out.completion_tick = t;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (state[i].queued > 0) rep.producers[i].completion_tick.reset();
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& out = rep.producers[i];
    out.backlog = state[i].queued;
    out.useful_bytes = state[i].account.useful_bytes;
    out.waste_bytes = state[i].account.waste_bytes;
    out.final_factor = penalty_factor(state[i].account, config.alpha);
  }
  return rep;
}

json to_json(const SimulationReport& r) {
  json producers = json::array();
  for (const auto& p : r.producers) {
    producers.push_back({{"id", p.id},
                         {"base_weight", to_string(p.base_weight)},
                         {"delivered", p.delivered},
                         {"total_requested", p.total_requested},
                         {"total_delivered", p.total_delivered},
                         {"backlog", p.backlog},
                         {"completion_tick", p.completion_tick ? json(*p.completion_tick) : json(nullptr)},
                         {"useful_bytes", to_double(p.useful_bytes)},
                         {"waste_bytes", to_double(p.waste_bytes)},
                         {"waste_bytes_exact", to_string(p.waste_bytes)},
                         {"final_factor", to_double(p.final_factor)},
                         {"final_factor_exact", to_string(p.final_factor)}});
  }
  return {{"ticks", r.ticks},
          {"total_bandwidth", r.total_bandwidth},
          {"alpha", to_string(r.alpha)},
          {"producers", producers},
          {"delivered_per_tick", r.delivered_per_tick}};
}

std::string format_tick_table(const SimulationReport& r) {
  std::ostringstream os;
  os << "tick";
  for (const auto& p : r.producers) os << '\t' << p.id;
  os << "\ttotal\n";
  for (std::uint64_t t = 0; t < r.ticks; ++t) {
    os << t;
    for (const auto& p : r.producers) os << '\t' << p.delivered[t];
    os << '\t' << r.delivered_per_tick[t] << '\n';
  }
  return os.str();
}

}  // namespace wastedata
