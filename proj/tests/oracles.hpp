#pragma once

// Naive reference implementations used only by tests. Each one is written
// independently of the production code path it checks.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wastedata/hierarchy.hpp"

namespace wastedata::oracle {

// List-based landfill: linear scans for everything.
class NaiveLandfill {
 public:
  NaiveLandfill(std::uint64_t capacity, std::uint64_t fade, bool refresh_on_read = true)
      : capacity_(capacity), fade_(fade), refresh_(refresh_on_read) {}

  bool put(const std::string& key, std::uint64_t size) {
    if (size > capacity_) return false;
    for (std::size_t i = 0; i < items_.size(); ++i)
      if (items_[i].key == key) {
        items_.erase(items_.begin() + static_cast<long>(i));
        break;
      }
    while (capacity_ - used() < size) {
      std::size_t victim = 0;
      for (std::size_t i = 1; i < items_.size(); ++i) {
        const auto& a = items_[i];
        const auto& b = items_[victim];
        if (a.last < b.last || (a.last == b.last && a.key < b.key)) victim = i;
      }
      items_.erase(items_.begin() + static_cast<long>(victim));
      ++evictions_;
    }
    items_.push_back({key, size, epoch_});
    return true;
  }

  std::optional<std::uint64_t> get(const std::string& key) {
    for (auto& it : items_)
      if (it.key == key) {
        if (refresh_) it.last = epoch_;
        return it.size;
      }
    return std::nullopt;
  }

  std::pair<std::uint64_t, std::uint64_t> advance(std::uint64_t n) {
    epoch_ += n;
    std::uint64_t count = 0, bytes = 0;
    std::vector<Item> keep;
    for (auto& it : items_) {
      if (epoch_ - it.last > fade_) {
        ++count;
        bytes += it.size;
      } else {
        keep.push_back(it);
      }
    }
    items_ = keep;
    fades_ += count;
    return {count, bytes};
  }

  std::uint64_t used() const {
    std::uint64_t u = 0;
    for (const auto& it : items_) u += it.size;
    return u;
  }
  std::uint64_t entries() const { return items_.size(); }
  std::uint64_t epoch() const { return epoch_; }
  std::uint64_t evictions() const { return evictions_; }
  std::uint64_t fades() const { return fades_; }

 private:
  struct Item {
    std::string key;
    std::uint64_t size;
    std::uint64_t last;
  };
  std::uint64_t capacity_, fade_;
  bool refresh_;
  std::vector<Item> items_;
  std::uint64_t epoch_ = 0, evictions_ = 0, fades_ = 0;
};

// Minimum rank over feasible rungs, by enumeration of (rank, feasible) pairs.
inline int min_feasible_rank(bool reduce, bool reuse, bool recycle, bool recover) {
  const std::pair<int, bool> rungs[] = {{0, reduce}, {1, reuse}, {2, recycle}, {3, recover}, {4, true}};
  int best = 99;
  for (auto [r, ok] : rungs)
    if (ok) best = std::min(best, r);
  return best;
}

// Pure weighted fair sharing with integer weights: no penalty, no rationals.
// Largest remainder with all quotas over the common denominator sum(w).
struct FairRow {
  std::uint64_t tick;
  std::size_t producer;
  std::uint64_t bytes;
};

inline std::vector<std::uint64_t> lr_integer(std::uint64_t total, const std::vector<std::uint64_t>& w) {
  unsigned __int128 sum = 0;
  for (auto x : w) sum += x;
  std::vector<std::uint64_t> seats(w.size());
  std::vector<unsigned __int128> rem(w.size());
  std::uint64_t given = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const unsigned __int128 num = static_cast<unsigned __int128>(total) * w[i];
    seats[i] = static_cast<std::uint64_t>(num / sum);
    rem[i] = num % sum;
    given += seats[i];
  }
  while (given < total) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < w.size(); ++i)
      if (rem[i] > rem[best]) best = i;
    ++seats[best];
    rem[best] = 0;
    ++given;
  }
  return seats;
}

inline std::vector<std::vector<std::uint64_t>> fair_share_sim(const std::vector<FairRow>& rows,
                                                              const std::vector<std::uint64_t>& weights,
                                                              std::uint64_t bandwidth, std::uint64_t ticks) {
  const std::size_t n = weights.size();
  std::vector<std::vector<std::uint64_t>> delivered(n, std::vector<std::uint64_t>(ticks, 0));
  std::vector<std::uint64_t> queued(n, 0);
  for (std::uint64_t t = 0; t < ticks; ++t) {
    for (const auto& r : rows)
      if (r.tick == t) queued[r.producer] += r.bytes;
    std::vector<std::uint64_t> got(n, 0);
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) members.push_back(i);
    std::uint64_t pool = bandwidth;
    while (pool > 0 && !members.empty()) {
      std::vector<std::uint64_t> w;
      for (auto i : members) w.push_back(weights[i]);
      auto seats = lr_integer(pool, w);
      std::uint64_t back = 0;
      std::vector<std::size_t> next;
      for (std::size_t k = 0; k < members.size(); ++k) {
        auto i = members[k];
        auto take = std::min(queued[i] - got[i], seats[k]);
        got[i] += take;
        back += seats[k] - take;
        if (got[i] < queued[i]) next.push_back(i);
      }
      pool = back;
      members = next;
    }
    for (std::size_t i = 0; i < n; ++i) {
      delivered[i][t] = got[i];
      queued[i] -= got[i];
    }
  }
  return delivered;
}

}  // namespace wastedata::oracle
