#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "wastedata/errors.hpp"
#include "wastedata/penalty.hpp"

using namespace wastedata;

namespace {

ProducerAccount account(std::string id, long useful, long waste, long weight = 1) {
  ProducerAccount a;
  a.id = std::move(id);
  a.useful_bytes = useful;
  a.waste_bytes = waste;
  a.base_weight = weight;
  return a;
}

SchedulerConfig config(std::uint64_t bw, Rational alpha, std::uint64_t ticks = 1) {
  SchedulerConfig c;
  c.total_bandwidth = bw;
  c.alpha = alpha;
  c.tick_count = ticks;
  return c;
}

WorkloadTrace parse(const std::string& text) {
  std::istringstream in(text);
  return WorkloadTrace::parse(in);
}

}  // namespace

TEST_SUITE("penalty") {
  TEST_CASE("rational parsing") {
    CHECK(parse_rational("3") == 3);
    CHECK(parse_rational("0.25") == Rational(1, 4));
    CHECK(parse_rational("-1.5") == Rational(-3, 2));
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational(".5") == Rational(1, 2));
    CHECK(to_string(parse_rational("6/8")) == "3/4");
    for (const char* bad : {"", "-", "abc", "1/0", "1/", "/2", "1.2.3", "1e5", "0x10"}) {
      CAPTURE(bad);
      CHECK_THROWS_AS(parse_rational(bad), DomainError);
    }
  }

  TEST_CASE("penalty factor examples") {
    CHECK(penalty_factor(account("p", 100, 0), 5) == 1);
    CHECK(penalty_factor(account("p", 100, 900), 0) == 1);
    CHECK(penalty_factor(account("p", 50, 50), 2) == Rational(1, 2));
    CHECK(penalty_factor(account("p", 0, 0), 3) == 1);
    CHECK_THROWS_AS(penalty_factor(account("p", 1, 1), -1), DomainError);
  }

  TEST_CASE("factor never increases with waste") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 2000; ++i) {
      const long useful = static_cast<long>(rng() % 1000);
      const long waste = static_cast<long>(rng() % 1000);
      const Rational alpha(static_cast<long>(rng() % 50), 1 + static_cast<long>(rng() % 10));
      const auto f0 = penalty_factor(account("p", useful, waste), alpha);
      const auto f1 = penalty_factor(account("p", useful, waste + 1 + static_cast<long>(rng() % 100)), alpha);
      CHECK(f1 <= f0);
      CHECK(f1 > 0);
    }
  }

  TEST_CASE("share examples") {
    {
      std::vector<ProducerAccount> a{account("a", 10, 5), account("b", 10, 5)};
      const auto s = allocate_shares(a, config(1000, 3));
      CHECK(s.at("a") == 500);
      CHECK(s.at("b") == 500);
    }
    {
      std::vector<ProducerAccount> a{account("solo", 1, 1000)};
      CHECK(allocate_shares(a, config(777, 10)).at("solo") == 777);
    }
    {
      std::vector<ProducerAccount> a{account("clean", 100, 0), account("dirty", 0, 100)};
      const auto s = allocate_shares(a, config(300, 1));
      CHECK(s.at("clean") == 200);
      CHECK(s.at("dirty") == 100);
      const auto f = fractional_shares(a, config(300, 1));
      CHECK(f[0] == 200);
      CHECK(f[1] == 100);
    }
  }

  TEST_CASE("share errors") {
    std::vector<ProducerAccount> none;
    CHECK_THROWS_AS(allocate_shares(none, config(10, 0)), DomainError);
    std::vector<ProducerAccount> dup{account("a", 1, 0), account("a", 1, 0)};
    CHECK_THROWS_AS(allocate_shares(dup, config(10, 0)), DomainError);
    std::vector<ProducerAccount> zero{account("a", 1, 0, 0)};
    CHECK_THROWS_AS(allocate_shares(zero, config(10, 0)), DomainError);
  }

  TEST_CASE("apportionment matches integer largest remainder") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 2000; ++i) {
      const std::size_t n = 1 + rng() % 6;
      std::vector<std::uint64_t> w(n);
      std::vector<Rational> wq;
      for (auto& x : w) {
        x = 1 + rng() % 20;
        wq.emplace_back(static_cast<unsigned long>(x));
      }
      const std::uint64_t total = rng() % 10000;
      const auto got = apportion(total, wq);
      CHECK(got == oracle::lr_integer(total, w));
      CHECK(std::accumulate(got.begin(), got.end(), std::uint64_t{0}) == total);
    }
    CHECK(apportion(1, std::vector<Rational>{1, 1}) == std::vector<std::uint64_t>{1, 0});
  }

  TEST_CASE("more waste never raises own share or lowers others") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 500; ++i) {
      std::vector<ProducerAccount> a;
      const std::size_t n = 2 + rng() % 4;
      for (std::size_t k = 0; k < n; ++k)
        a.push_back(account("p" + std::to_string(k), static_cast<long>(rng() % 1000), static_cast<long>(rng() % 1000),
                            1 + static_cast<long>(rng() % 3)));
      const auto cfg = config(1 + rng() % 5000, Rational(1 + static_cast<long>(rng() % 8), 2));
      const auto before = fractional_shares(a, cfg);
      const std::size_t who = rng() % n;
      a[who].waste_bytes += 1 + static_cast<long>(rng() % 500);
      const auto after = fractional_shares(a, cfg);
      for (std::size_t k = 0; k < n; ++k) {
        if (k == who) CHECK(after[k] <= before[k]);
        else CHECK(after[k] >= before[k]);
      }
    }
  }

  TEST_CASE("idle producers get nothing and keep factor one") {
    const auto r = simulate(parse("0 a 0 0\n1 b 0 1\n"), config(100, 2, 3));
    for (const auto& p : r.producers) {
      CHECK(p.total_delivered == 0);
      CHECK(p.final_factor == 1);
      CHECK_FALSE(p.completion_tick);
    }
    CHECK(r.delivered_per_tick == std::vector<std::uint64_t>{0, 0, 0});
  }

  TEST_CASE("clean producer pulls ahead of a half-waste producer") {
    std::string text;
    for (int t = 0; t < 5; ++t) {
      text += std::to_string(t) + " clean 10000 0\n";
      text += std::to_string(t) + " waster 10000 1/2\n";
    }
    const auto r = simulate(parse(text), config(1000, 1, 5));
    REQUIRE(r.producers.size() == 2);
    CHECK(r.producers[0].id == "clean");
    CHECK(r.producers[0].delivered == std::vector<std::uint64_t>{500, 600, 600, 600, 600});
    CHECK(r.producers[1].delivered == std::vector<std::uint64_t>{500, 400, 400, 400, 400});
    CHECK(r.producers[1].final_factor == Rational(2, 3));
    CHECK(r.producers[0].final_factor == 1);
    CHECK(r.producers[1].waste_bytes == 1050);
  }

  TEST_CASE("unused share flows to producers still waiting") {
    const auto r = simulate(parse("0 small 100 0\n0 big 5000 0\n"), config(1000, 0, 2));
    CHECK(r.producers[0].id == "big");
    CHECK(r.producers[0].delivered == std::vector<std::uint64_t>{900, 1000});
    CHECK(r.producers[1].delivered == std::vector<std::uint64_t>{100, 0});
    CHECK(r.producers[1].completion_tick == 0u);
    CHECK(r.producers[0].backlog == 3100);
    CHECK_FALSE(r.producers[0].completion_tick);
  }

  TEST_CASE("alpha zero equals weighted fair sharing") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + rng() % 4;
      const std::uint64_t ticks = 1 + rng() % 8;
      const std::uint64_t bw = 1 + rng() % 3000;
      std::vector<std::uint64_t> weights(n);
      std::string text;
      for (std::size_t i = 0; i < n; ++i) {
        weights[i] = 1 + rng() % 4;
        text += "weight p" + std::to_string(i) + " " + std::to_string(weights[i]) + "\n";
      }
      std::vector<oracle::FairRow> rows;
      for (int k = 0; k < 12; ++k) {
        oracle::FairRow row{rng() % ticks, rng() % n, rng() % 2000};
        rows.push_back(row);
        text += std::to_string(row.tick) + " p" + std::to_string(row.producer) + " " + std::to_string(row.bytes) +
                " " + std::to_string(rng() % 5) + "/4\n";
      }
      const auto r = simulate(parse(text), config(bw, 0, ticks));
      const auto want = oracle::fair_share_sim(rows, weights, bw, ticks);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(r.producers[i].delivered == want[i]);
    }
  }

  TEST_CASE("per-tick conservation") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 100; ++trial) {
      const std::uint64_t ticks = 1 + rng() % 6, bw = 1 + rng() % 1000;
      std::string text;
      for (int k = 0; k < 10; ++k)
        text += std::to_string(rng() % ticks) + " p" + std::to_string(rng() % 3) + " " + std::to_string(rng() % 800) +
                " " + std::to_string(rng() % 3) + "/2\n";
      const auto r = simulate(parse(text), config(bw, Rational(1 + static_cast<long>(rng() % 4)), ticks));
      std::uint64_t backlog = 0;
      const auto tr = parse(text);
      for (std::uint64_t t = 0; t < ticks; ++t) {
        for (const auto& row : tr.rows)
          if (row.tick == t) backlog += row.requested_bytes;
        const auto expect = std::min(bw, backlog);
        REQUIRE(r.delivered_per_tick[t] == expect);
        backlog -= expect;
      }
    }
  }

  TEST_CASE("reports are deterministic") {
    const std::string text = "0 a 500 1/3\n0 b 700 0\n1 a 900 1\n2 b 100 1/2\n";
    const auto a = to_json(simulate(parse(text), config(400, 2, 4))).dump();
    const auto b = to_json(simulate(parse(text), config(400, 2, 4))).dump();
    CHECK(a == b);
  }

  TEST_CASE("workload parse errors") {
    for (const char* bad : {"0 a 10", "x a 10 0", "0 a -5 0", "0 a 10 2", "0 a 10 -1/2", "weight a 0",
                            "weight a", "0 a 10 zz"}) {
      CAPTURE(bad);
      CHECK_THROWS_AS(parse(bad), DomainError);
    }
    CHECK_THROWS_AS(simulate(parse("5 a 10 0"), config(10, 0, 5)), DomainError);
    CHECK_THROWS_AS(simulate(parse(""), config(0, 0, 5)), DomainError);
    CHECK_THROWS_AS(simulate(parse(""), config(10, -1, 5)), DomainError);
    CHECK_THROWS_AS(simulate(parse(""), config(10, 0, 0)), DomainError);
  }
}
