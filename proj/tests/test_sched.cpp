#include <doctest.h>

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "seistune/sched.hpp"

using namespace seistune;
using sched::IterRange;
using sched::Kind;
using sched::SchedulerSpec;
using sched::WorkerPool;

TEST_CASE("default chunk sizes") {
  CHECK(sched::default_chunk(Kind::kStatic, {0, 100}, 8) == 13);
  CHECK(sched::default_chunk(Kind::kStatic, {0, 8}, 8) == 1);
  CHECK(sched::default_chunk(Kind::kStatic, {0, 7}, 3) == 3);
  CHECK(sched::default_chunk(Kind::kDynamic, {0, 100}, 8) == 1);
  CHECK(sched::default_chunk(Kind::kGuided, {0, 100}, 8) == 1);
  CHECK_THROWS_AS(sched::default_chunk(Kind::kStatic, {5, 5}, 4), std::invalid_argument);
  CHECK_THROWS_AS(sched::default_chunk(Kind::kStatic, {0, 10}, 0), std::invalid_argument);
}

TEST_CASE("static assignment is round-robin with a short tail") {
  auto a = sched::static_assignment({0, 10}, 3, 2);
  REQUIRE(a.size() == 4);
  CHECK(a[0] == std::pair<int, IterRange>{0, {0, 3}});
  CHECK(a[1] == std::pair<int, IterRange>{1, {3, 6}});
  CHECK(a[2] == std::pair<int, IterRange>{0, {6, 9}});
  CHECK(a[3] == std::pair<int, IterRange>{1, {9, 10}});

  auto b = sched::static_assignment({0, 4}, 4, 2);
  REQUIRE(b.size() == 1);
  CHECK(b[0] == std::pair<int, IterRange>{0, {0, 4}});

  auto c = sched::static_assignment({0, 12}, 1, 3);
  REQUIRE(c.size() == 12);
  for (int k = 0; k < 12; ++k) {
    CHECK(c[static_cast<std::size_t>(k)].first == k % 3);
    CHECK(c[static_cast<std::size_t>(k)].second == IterRange{k, k + 1});
  }

  CHECK(sched::static_assignment({3, 3}, 2, 2).empty());
  CHECK_THROWS_AS(sched::static_assignment({0, 4}, 0, 2), std::invalid_argument);
}

TEST_CASE("guided chunks shrink with remaining work and respect the floor") {
  CHECK(sched::guided_next_chunk(100, 4, 1) == 25);
  CHECK(sched::guided_next_chunk(75, 4, 1) == 19);
  CHECK(sched::guided_next_chunk(3, 4, 5) == 3);
  CHECK(sched::guided_next_chunk(0, 4, 1) == 0);

  // Simulated drain: sizes never increase, the floor binds late, total is N.
  std::int64_t remaining = 1000;
  std::int64_t previous = remaining;
  std::int64_t total = 0;
  while (remaining > 0) {
    std::int64_t take = sched::guided_next_chunk(remaining, 3, 4);
    CHECK(take >= 1);
    CHECK(take <= previous);
    CHECK((take >= 4 || take == remaining));
    previous = take;
    total += take;
    remaining -= take;
  }
  CHECK(total == 1000);
}

TEST_CASE("competitor chunk formula") {
  CHECK(sched::competitor_chunk(1024, 8) == 4);
  CHECK(sched::competitor_chunk(160000, 32) == 19);
  CHECK(sched::competitor_chunk(8, 8) == 1);
  CHECK_THROWS_WITH_AS(sched::competitor_chunk(7, 8), "formula undefined for N < P",
                       std::domain_error);
}

TEST_CASE("spec names round-trip") {
  for (Kind k : {Kind::kStatic, Kind::kDynamic, Kind::kGuided}) {
    CHECK(sched::kind_from_name(sched::kind_name(k)) == k);
  }
  CHECK(!sched::kind_from_name("other").has_value());
  CHECK(sched::to_string({Kind::kGuided, 7}) == "guided,7");
  CHECK(sched::to_string({Kind::kDynamic, std::nullopt}) == "dynamic");
}

namespace {

// Runs the loop and checks that every index executed exactly once.
void check_exactly_once(WorkerPool& pool, IterRange range, const SchedulerSpec& spec) {
  std::vector<std::atomic<int>> hits(static_cast<std::size_t>(range.length()));
  pool.run(range, spec, [&](std::int64_t i) {
    hits[static_cast<std::size_t>(i - range.begin)].fetch_add(1);
  });
  for (const auto& h : hits) {
    REQUIRE(h.load() == 1);
  }
}

}  // namespace

TEST_CASE("every index runs exactly once for randomized specs") {
  std::mt19937_64 rng(20240817);
  for (int threads : {1, 2, 3, 8}) {
    WorkerPool pool({threads});
    for (int rep = 0; rep < 30; ++rep) {
      std::int64_t begin = static_cast<std::int64_t>(rng() % 1000);
      std::int64_t len = 1 + static_cast<std::int64_t>(rng() % 3000);
      Kind kind = std::array{Kind::kStatic, Kind::kDynamic, Kind::kGuided}[rng() % 3];
      std::optional<std::int64_t> chunk;
      if (rng() % 4 != 0) chunk = 1 + static_cast<std::int64_t>(rng() % 400);
      check_exactly_once(pool, {begin, begin + len}, {kind, chunk});
    }
  }
}

TEST_CASE("oversubscribed pool still covers the range") {
  WorkerPool pool({128});
  check_exactly_once(pool, {0, 5000}, {Kind::kDynamic, 7});
  check_exactly_once(pool, {0, 100}, {Kind::kStatic, std::nullopt});
  check_exactly_once(pool, {0, 999}, {Kind::kGuided, 3});
}

TEST_CASE("empty range dispatches nothing") {
  WorkerPool pool({4});
  bool called = false;
  double secs = pool.run({10, 10}, {Kind::kDynamic, std::nullopt},
                         [&](std::int64_t) { called = true; });
  CHECK(!called);
  CHECK(secs >= 0.0);
  CHECK(pool.last_run_stats().chunks_dispensed == 0);
}

TEST_CASE("dynamic dispenses ceil(N / chunk) chunks") {
  WorkerPool pool({4});
  pool.run({0, 100}, {Kind::kDynamic, 8}, [](std::int64_t) {});
  CHECK(pool.last_run_stats().chunks_dispensed == 13);
  pool.run({0, 32}, {Kind::kDynamic, 32}, [](std::int64_t) {});
  CHECK(pool.last_run_stats().chunks_dispensed == 1);
  pool.run({0, 7}, {Kind::kStatic, 2}, [](std::int64_t) {});
  CHECK(pool.last_run_stats().chunks_dispensed == 4);
}

TEST_CASE("static execution matches the declared assignment") {
  const int threads = 4;
  const std::int64_t chunk = 3;
  const IterRange range{0, 29};
  WorkerPool pool({threads});
  std::mutex mu;
  std::map<std::int64_t, std::thread::id> owner;
  pool.run(range, {Kind::kStatic, chunk}, [&](std::int64_t i) {
    std::lock_guard<std::mutex> lk(mu);
    owner[i] = std::this_thread::get_id();
  });
  auto assignment = sched::static_assignment(range, chunk, threads);
  // All chunks mapped to one worker slot must share one executing thread.
  std::map<int, std::set<std::thread::id>> per_slot;
  for (const auto& [slot, r] : assignment) {
    for (std::int64_t i = r.begin; i < r.end; ++i) {
      per_slot[slot].insert(owner.at(i));
    }
  }
  for (const auto& [slot, ids] : per_slot) {
    CHECK(ids.size() == 1);
  }
  // Distinct slots use distinct threads.
  std::set<std::thread::id> all;
  for (const auto& [slot, ids] : per_slot) all.insert(*ids.begin());
  CHECK(all.size() == per_slot.size());
}

TEST_CASE("a throwing body surfaces the failing index") {
  WorkerPool pool({3});
  auto run = [&] {
    pool.run({0, 200}, {Kind::kDynamic, 5}, [](std::int64_t i) {
      if (i == 37) throw std::runtime_error("boom");
    });
  };
  CHECK_THROWS_WITH_AS(run(), "parallel loop body failed at index 37: boom",
                       std::runtime_error);
  // The pool survives a failed run.
  check_exactly_once(pool, {0, 50}, {Kind::kGuided, std::nullopt});
}

TEST_CASE("invalid chunk is rejected") {
  WorkerPool pool({2});
  CHECK_THROWS_AS(pool.run({0, 10}, {Kind::kDynamic, 0}, [](std::int64_t) {}),
                  std::invalid_argument);
}

TEST_CASE("run reports nonnegative wall time") {
  WorkerPool pool({2});
  double secs = pool.run({0, 20000}, {Kind::kGuided, std::nullopt}, [](std::int64_t) {});
  CHECK(secs >= 0.0);
  CHECK(secs < 60.0);
}
