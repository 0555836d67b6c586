#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "wastedata/errors.hpp"
#include "wastedata/landfill.hpp"

using namespace wastedata;

namespace {

Landfill store(std::uint64_t cap, std::uint64_t fade, bool refresh = true) {
  return Landfill(LandfillConfig{cap, fade, refresh});
}

std::string bytes(std::size_t n) { return std::string(n, 'v'); }

}  // namespace

TEST_SUITE("landfill") {
  TEST_CASE("config validation") {
    CHECK_THROWS_AS(store(0, 1), DomainError);
    CHECK_THROWS_AS(store(1, 0), DomainError);
  }

  TEST_CASE("put into empty store") {
    auto s = store(100, 3);
    CHECK(s.put("a", bytes(100)) == PutResult::Stored);
    CHECK(s.stats().live_bytes == 100);
  }

  TEST_CASE("oversized put is rejected and changes nothing") {
    auto s = store(100, 3);
    s.put("a", bytes(10));
    CHECK(s.put("b", bytes(101)) == PutResult::RejectedTooLarge);
    CHECK(s.stats().live_entries == 1);
    CHECK(s.get("a"));
  }

  TEST_CASE("capacity pressure evicts least recently used") {
    auto s = store(100, 10);
    s.put("A", bytes(60));
    s.advance_epoch(1);
    s.put("B", bytes(30));
    s.advance_epoch(1);
    CHECK(s.put("C", bytes(40)) == PutResult::Stored);
    CHECK_FALSE(s.get("A"));
    CHECK(s.get("B"));
    CHECK(s.get("C"));
    CHECK(s.stats().lifetime_evictions == 1);
    CHECK(s.stats().live_bytes == 70);
  }

  TEST_CASE("eviction ties break by key") {
    auto s = store(20, 10);
    s.put("b", bytes(10));
    s.put("a", bytes(10));
    s.put("c", bytes(10));
    CHECK_FALSE(s.get("a"));
    CHECK(s.get("b"));
  }

  TEST_CASE("reads within the lifetime refresh") {
    auto s = store(100, 3);
    s.put("k", bytes(5));
    s.advance_epoch(2);
    CHECK(s.get("k") == bytes(5));
    CHECK(s.last_access_epoch("k") == 2u);
  }

  TEST_CASE("unaccessed entries fade") {
    auto s = store(100, 3);
    CHECK_FALSE(s.get("never"));
    s.put("k", bytes(5));
    const auto f = s.advance_epoch(4);
    CHECK(f.entries_faded == 1);
    CHECK(f.bytes_reclaimed == 5);
    CHECK_FALSE(s.get("k"));
  }

  TEST_CASE("no refresh on read when disabled") {
    auto s = store(100, 3, false);
    s.put("k", bytes(5));
    s.advance_epoch(3);
    CHECK(s.get("k"));
    CHECK(s.last_access_epoch("k") == 0u);
    s.advance_epoch(1);
    CHECK_FALSE(s.get("k"));
  }

  TEST_CASE("advance fade accounting") {
    auto empty = store(100, 3);
    CHECK(empty.advance_epoch(5) == FadeStats{0, 0});
    CHECK_THROWS_AS(empty.advance_epoch(0), DomainError);

    auto s = store(100, 3);
    s.put("old", bytes(7));
    s.advance_epoch(5);  // old fades here: 5 - 0 > 3
    s.put("x", bytes(11));
    s.put("y", bytes(13));
    const auto f = s.advance_epoch(4);  // 9 - 5 = 4 > 3
    CHECK(f == FadeStats{2, 24});
    CHECK(s.stats().lifetime_fades == 3);
    CHECK(s.stats().live_entries == 0);
  }

  TEST_CASE("two single advances equal one double advance") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
      auto a = store(500, 1 + rng() % 4);
      auto b = store(500, a.config().fade_lifetime_epochs);
      for (int i = 0; i < 30; ++i) {
        const auto key = "k" + std::to_string(rng() % 10);
        const auto v = bytes(rng() % 50);
        a.put(key, v);
        b.put(key, v);
        if (rng() % 4 == 0) {
          a.advance_epoch(1);
          b.advance_epoch(1);
        }
      }
      a.advance_epoch(1);
      a.advance_epoch(1);
      b.advance_epoch(2);
      auto sa = a.stats(), sb = b.stats();
      CHECK(sa.live_entries == sb.live_entries);
      CHECK(sa.live_bytes == sb.live_bytes);
      CHECK(sa.current_epoch == sb.current_epoch);
      for (int k = 0; k < 10; ++k) CHECK(a.last_access_epoch("k" + std::to_string(k)) == b.last_access_epoch("k" + std::to_string(k)));
    }
  }

  TEST_CASE("stats accounting") {
    auto s = store(100, 3);
    CHECK(s.stats().live_entries == 0);
    s.put("a", bytes(10));
    s.put("b", bytes(10));
    s.put("c", bytes(10));
    CHECK(s.stats().live_bytes == 30);
    s.put("a", bytes(4));  // overwrite replaces
    CHECK(s.stats().live_bytes == 24);
    CHECK(s.stats().live_entries == 3);
  }

  TEST_CASE("random traces match the list-based reference") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
      const std::uint64_t cap = 50 + rng() % 500;
      const std::uint64_t fade = 1 + rng() % 6;
      const bool refresh = rng() % 3 != 0;
      auto s = store(cap, fade, refresh);
      oracle::NaiveLandfill ref(cap, fade, refresh);
      for (int i = 0; i < 3000; ++i) {
        const auto key = "k" + std::to_string(rng() % 40);
        switch (rng() % 10) {
          case 0:
          case 1:
          case 2:
          case 3: {
            const std::size_t n = rng() % (cap / 3 + 2);
            const bool stored = s.put(key, bytes(n)) == PutResult::Stored;
            REQUIRE(stored == ref.put(key, n));
            break;
          }
          case 4:
          case 5:
          case 6:
          case 7: {
            const auto got = s.get(key);
            const auto want = ref.get(key);
            REQUIRE(got.has_value() == want.has_value());
            if (got) REQUIRE(got->size() == *want);
            break;
          }
          default: {
            const std::uint64_t n = 1 + rng() % 3;
            const auto f = s.advance_epoch(n);
            const auto [c, b] = ref.advance(n);
            REQUIRE(f.entries_faded == c);
            REQUIRE(f.bytes_reclaimed == b);
          }
        }
        const auto st = s.stats();
        REQUIRE(st.live_bytes <= cap);
        REQUIRE(st.live_bytes == ref.used());
        REQUIRE(st.live_entries == ref.entries());
        REQUIRE(st.current_epoch == ref.epoch());
        REQUIRE(st.lifetime_evictions == ref.evictions());
        REQUIRE(st.lifetime_fades == ref.fades());
      }
    }
  }

  TEST_CASE("faded keys stay gone until re-put") {
    auto s = store(100, 1);
    s.put("k", bytes(3));
    s.advance_epoch(2);
    for (int i = 0; i < 5; ++i) {
      CHECK_FALSE(s.get("k"));
      s.advance_epoch(1);
    }
    s.put("k", bytes(3));
    CHECK(s.get("k"));
  }

  TEST_CASE("time to fade shrinks without access") {
    auto s = store(100, 5);
    s.put("k", bytes(1));
    std::uint64_t prev = 5 + 1;
    for (int i = 0; i < 5; ++i) {
      s.advance_epoch(1);
      const std::uint64_t remaining = *s.last_access_epoch("k") + 5 + 1 - s.stats().current_epoch;
      CHECK(remaining < prev);
      prev = remaining;
    }
  }

  TEST_CASE("operation log rebuilds the store") {
    std::ostringstream log;
    auto s = store(64, 2);
    s.attach_log(&log);
    std::mt19937_64 rng(8);
    for (int i = 0; i < 500; ++i) {
      const std::string key = (i % 7 == 0) ? "odd key %" + std::to_string(rng() % 5) : "k" + std::to_string(rng() % 12);
      switch (rng() % 3) {
        case 0: {
          std::string v(rng() % 30, '\0');
          for (auto& c : v) c = static_cast<char>(rng());
          s.put(key, v);
          break;
        }
        case 1: s.get(key); break;
        default: s.advance_epoch(1 + rng() % 2);
      }
    }
    std::istringstream in(log.str());
    auto r = replay_log(in, s.config());
    CHECK(r.stats() == s.stats());
    for (int k = 0; k < 12; ++k) {
      const auto key = "k" + std::to_string(k);
      CHECK(r.last_access_epoch(key) == s.last_access_epoch(key));
      CHECK(r.get(key) == s.get(key));
    }
  }

  TEST_CASE("trace parsing") {
    std::istringstream in("# header\nPUT a%20b 3 616263\nGET a%20b   # trailing\n\nADV 2\nPUT z 4\n");
    const auto ops = parse_trace(in);
    REQUIRE(ops.size() == 4);
    CHECK(ops[0].key == "a b");
    CHECK(ops[0].value == "abc");
    CHECK(ops[0].line == 2);
    CHECK(ops[2].kind == TraceOp::Kind::Advance);
    CHECK(ops[2].epochs == 2);
    CHECK_FALSE(ops[3].value);
    CHECK(format_trace_op(ops[0]) == "PUT a%20b 3 616263");

    for (const char* bad : {"PUT a", "PUT a x", "PUT a 2 abc", "PUT a 3 6162", "GET", "ADV 0", "ADV -1",
                            "DEL a", "GET a%2", "PUT a 1 zz"}) {
      CAPTURE(bad);
      std::istringstream b(bad);
      CHECK_THROWS_AS(parse_trace(b), DomainError);
    }
  }

  TEST_CASE("key encoding round-trips") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 500; ++i) {
      std::string k(1 + rng() % 12, '\0');
      for (auto& c : k) c = static_cast<char>(rng());
      const auto enc = encode_key(k);
      CHECK(enc.find_first_of(" \t\n#") == std::string::npos);
      CHECK(decode_key(enc) == k);
    }
  }
}
