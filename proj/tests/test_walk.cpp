#include <catch_amalgamated.hpp>

#include <numeric>
#include <vector>

#include "erwlab/literal.hpp"
#include "erwlab/walk.hpp"
#include "oracles.hpp"

using namespace erwlab;

TEST_CASE("compact and full count tables give identical walks", "[walk]") {
  for (const char* lit : {"periodic:0.9,0.1", "periodic:0.25,0.75,0.8,0.2,0.5", "bounded:0.9,0.2,0.7",
                          "tail:0.8,0.1@0.6", "periodic:1,0"}) {
    const auto env = parse_environment(lit);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      WalkOptions fast, ref;
      fast.emit_every = ref.emit_every = 37;
      ref.reference_table = true;
      Rng a(seed), b(seed);
      const auto t1 = run_walk(env, 5000, a, fast);
      const auto t2 = run_walk(env, 5000, b, ref);
      INFO(lit << " seed " << seed);
      CHECK(t1.final_position == t2.final_position);
      CHECK(t1.max_abs_position == t2.max_abs_position);
      CHECK(t1.returns_to_origin == t2.returns_to_origin);
      CHECK(t1.first_hit_minus1 == t2.first_hit_minus1);
      CHECK(t1.distinct_sites == t2.distinct_sites);
      CHECK(t1.positions == t2.positions);
      REQUIRE(t2.local_time_total);
      CHECK(*t2.local_time_total == 5001);
      CHECK_FALSE(t1.local_time_total);
    }
  }
}

TEST_CASE("walk bookkeeping", "[walk]") {
  const auto env = make_periodic({0.6, 0.3});
  Rng rng(3);
  WalkOptions o;
  o.emit_every = 10;
  const auto t = run_walk(env, 1000, rng, o);
  CHECK(t.steps == 1000);
  CHECK((t.final_position % 2 + 2) % 2 == 0);
  REQUIRE(t.positions.size() == 101);
  CHECK(t.positions.front() == 0);
  CHECK(t.positions.back() == t.final_position);
  for (std::size_t i = 1; i < t.positions.size(); ++i) CHECK(std::abs(t.positions[i] - t.positions[i - 1]) <= 10);
  CHECK(t.distinct_sites >= static_cast<std::uint64_t>(t.max_abs_position) + 1);
  CHECK_THROWS_AS(run_walk(env, 0, rng), std::invalid_argument);
}

TEST_CASE("the first cookie is used on arrival", "[walk]") {
  // every first visit steps right with certainty
  const auto env = make_periodic({1.0, 0.0});
  Rng rng(1);
  const auto t = run_walk(env, 100, rng);
  CHECK(t.final_position == 100);
  CHECK(t.returns_to_origin == 0);
  const auto back = run_walk(make_bounded({0.0}), 1, rng);
  CHECK(back.final_position == -1);
  CHECK(back.first_hit_minus1 == 1);
}

TEST_CASE("stopping at -1", "[walk]") {
  Rng rng(5);
  WalkOptions o;
  o.stop_at_minus1 = true;
  const auto t = run_walk(make_periodic({0.3}), 100'000, rng, o);
  REQUIRE(t.first_hit_minus1);
  CHECK(t.steps == *t.first_hit_minus1);
  CHECK(t.final_position == -1);
}

TEST_CASE("transient and recurrent ensembles", "[walk][statistical]") {
  const auto right = ensemble_summary(make_periodic({0.9, 0.9, 0.1, 0.1}), 10'000, 1000);
  CHECK(right.fraction_positive > 0.8);
  CHECK(right.final_median > 0.0);
  const auto left = ensemble_summary(make_periodic({0.1, 0.1, 0.9, 0.9}), 10'000, 1000, {77, 1});
  CHECK(left.final_median < 0.0);
  CHECK(std::abs(right.final_position.mean + left.final_position.mean) <=
        4 * std::hypot(right.final_position.se, left.final_position.se));
  const auto rec = ensemble_summary(make_periodic({0.9, 0.1}), 10'000, 1000);
  CHECK(rec.returns_to_origin.mean > 3 * right.returns_to_origin.mean);
  CHECK(rec.max_abs_position.mean > 0.0);
}

TEST_CASE("hitting -1 gets likelier with more steps", "[walk][statistical]") {
  const auto env = make_bounded({0.9});
  double prev = -1.0;
  std::uint64_t seed = 10;
  for (std::uint64_t steps : {10, 1000, 100'000}) {
    const auto s = ensemble_summary(env, steps, 2000, {seed++, 1});
    CHECK(s.hit_minus1_frequency > prev);
    prev = s.hit_minus1_frequency;
  }
}

TEST_CASE("ensembles do not depend on the worker count", "[walk]") {
  const auto env = make_periodic({0.7, 0.2, 0.6});
  const auto a = run_walks(env, 2000, 50, {5, 1});
  const auto b = run_walks(env, 2000, 50, {5, 4});
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].final_position == b[i].final_position);
}

TEST_CASE("edge crossings before -1 follow the branching chain", "[walk][statistical]") {
  const auto env = make_periodic({0.4, 0.6, 0.2});
  const std::size_t n = 10'000;
  std::vector<Count> w1, w2, wsum, z1, z2, zsum;
  Rng rng(31);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = crossings_until_minus1(env, 10'000'000, rng);
    REQUIRE(c);
    w1.push_back(c->size() > 0 ? (*c)[0] : 0);
    w2.push_back(c->size() > 1 ? (*c)[1] : 0);
    wsum.push_back(std::accumulate(c->begin(), c->end(), Count{0}));
  }
  const StepSampler s(env);
  for (std::size_t i = 0; i < n; ++i) {
    const auto path = chain_path(s, 1'000'000, rng);
    REQUIRE(path.back() == 0);
    z1.push_back(path[1]);
    z2.push_back(path.size() > 2 ? path[2] : 0);
    zsum.push_back(std::accumulate(path.begin() + 1, path.end(), Count{0}));
  }
  const double crit = oracle::ks_critical(n, n, 0.01);
  CHECK(oracle::ks_statistic(w1, z1) < crit);
  CHECK(oracle::ks_statistic(w2, z2) < crit);
  CHECK(oracle::ks_statistic(wsum, zsum) < crit);
}
