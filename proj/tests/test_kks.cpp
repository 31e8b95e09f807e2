#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "erwlab/kks.hpp"
#include "erwlab/literal.hpp"
#include "oracles.hpp"

using namespace erwlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Largest gap between the empirical CDF of `draws` and the exact CDF.
double ks_against(const UDistribution& d, const std::vector<Count>& draws) {
  std::map<Count, double> freq;
  for (Count u : draws) freq[u] += 1.0 / static_cast<double>(draws.size());
  const Count hi = std::max<Count>(freq.rbegin()->first, d.support_offset + static_cast<Count>(d.mass.size()));
  double f_emp = 0, f_exact = 0, worst = 0;
  for (Count k = 0; k <= hi; ++k) {
    if (auto it = freq.find(k); it != freq.end()) f_emp += it->second;
    f_exact += d.probability(k);
    worst = std::max(worst, std::abs(f_emp - f_exact));
  }
  return worst;
}

template <class Draw>
std::vector<Count> draws(std::size_t n, std::uint64_t seed, Draw draw) {
  Rng rng(seed);
  std::vector<Count> out(n);
  for (auto& v : out) v = draw(rng);
  return out;
}

}  // namespace

TEST_CASE("exact law for x = 1 is geometric", "[kks][oracle]") {
  for (double p : {0.3, 0.5, 0.8}) {
    const auto d = exact_U_distribution(make_periodic({p}), 1, 1e-14);
    CHECK(d.support_offset == 0);
    for (Count k = 0; k < 30; ++k) CHECK_THAT(d.probability(k), WithinAbs(std::pow(p, k) * (1 - p), 1e-15 + d.tail_bound));
  }
}

TEST_CASE("exact law matches path enumeration", "[kks][oracle]") {
  for (const auto& env : {make_periodic({0.9, 0.1}), make_bounded({0.9, 0.2, 0.7}), make_periodic({0.3, 0.6, 0.55})}) {
    double lost = 0;
    const auto law = oracle::enumerate_U(env, 2, 40, &lost);
    REQUIRE(lost < 1e-9);
    const auto d = exact_U_distribution(env, 2, 1e-14);
    for (const auto& [k, w] : law) CHECK_THAT(d.probability(k), WithinAbs(w, 1e-9));
  }
}

TEST_CASE("exact law invariants", "[kks][oracle]") {
  for (const auto& env : {make_periodic({0.9, 0.1}), make_bounded({0.9, 0.9, 0.9}), make_periodic({0.7, 0.7})})
    for (Count x : {1, 7, 60}) {
      const double eps = 1e-11;
      const auto d = exact_U_distribution(env, x, eps);
      CHECK(d.tail_bound <= eps);
      CHECK_THAT(d.total() + d.tail_bound, WithinAbs(1.0, 1e-12));
      for (double m : d.mass) CHECK(m >= 0.0);
    }
}

TEST_CASE("exact law argument checks", "[kks][oracle]") {
  const auto env = make_periodic({0.5});
  CHECK_THROWS_AS(exact_U_distribution(env, 0, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(exact_U_distribution(env, 3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(exact_U_distribution(env, 1, 1e-300), std::runtime_error);
}

TEST_CASE("bounded stacks have mean x + delta", "[kks][oracle]") {
  for (const auto& p : std::vector<std::vector<double>>{{0.9, 0.9, 0.9}, {0.3, 0.8, 0.6}, {0.95}})
    for (Count x : {4, 10, 37}) {
      const auto env = make_bounded(p);
      if (x <= static_cast<Count>(p.size())) continue;
      CHECK_THAT(exact_moments(env, x, 1e-15).mean, WithinAbs(static_cast<double>(x) + env.prefix_drift(), 1e-9));
    }
  CHECK_THAT(exact_moments(make_bounded({0.9, 0.9, 0.9}), 5, 1e-15).mean, WithinAbs(7.4, 1e-9));
}

TEST_CASE("drift of positive bounded stacks grows to delta", "[kks][oracle]") {
  for (const auto& p : std::vector<std::vector<double>>{{0.9}, {0.8, 0.7}, {0.75, 0.6, 0.9}}) {
    const auto env = make_bounded(p);
    double prev = -1.0;
    for (Count x = 1; x <= 40; ++x) {
      const double rho = exact_moments(env, x, 1e-15).rho;
      CHECK(rho >= prev - 1e-12);
      CHECK(rho <= env.prefix_drift() + 1e-12);
      prev = rho;
    }
  }
}

TEST_CASE("moments of the fair stack", "[kks][oracle]") {
  const auto m = exact_moments(make_periodic({0.5}), 100, 1e-15);
  CHECK_THAT(m.mean, WithinAbs(100.0, 1e-9));
  CHECK_THAT(m.nu, WithinAbs(2.0, 1e-9));
}

TEST_CASE("drift of (0.9, 0.1) at x = 200", "[kks][oracle]") {
  const auto m = exact_moments(make_periodic({0.9, 0.1}), 200, 1e-15);
  CHECK_THAT(m.rho, WithinAbs(0.08, 1e-6));
  CHECK(m.error_bound < 1e-4);
}

TEST_CASE("U(0) is 1 and degenerate stacks are rejected", "[kks]") {
  Rng rng(1);
  for (int i = 0; i < 10; ++i) CHECK(sample_U(make_periodic({0.3}), 0, rng) == 1);
  CHECK_THROWS_AS(StepSampler(make_periodic({1.0, 1.0})), std::invalid_argument);
  CHECK_THROWS_AS(StepSampler(CookieEnvironment::custom_tail({0.2}, 1.0)), std::invalid_argument);
  CHECK_NOTHROW(StepSampler(make_periodic({1.0, 0.0})));
}

TEST_CASE("sample means", "[kks][statistical]") {
  const auto fair = StepSampler(make_periodic({0.5}));
  const auto a = draws(1'000'000, 11, [&](Rng& r) { return fair.sample(5, r); });
  const auto sa = mean_se(a);
  CHECK(std::abs(sa.mean - 5.0) <= 3 * sa.se);

  const auto bounded = StepSampler(make_bounded({0.9, 0.9, 0.9}));
  const auto b = draws(1'000'000, 12, [&](Rng& r) { return bounded.sample(5, r); });
  const auto sb = mean_se(b);
  CHECK(std::abs(sb.mean - 7.4) <= 3 * sb.se);
}

TEST_CASE("sampler frequencies match the exact law bucket by bucket", "[kks][statistical]") {
  const auto env = make_periodic({0.9, 0.1});
  const StepSampler s(env);
  const std::size_t n = 1'000'000;
  for (Count x : {1, 5, 20}) {
    const auto d = exact_U_distribution(env, x, 1e-14);
    const auto v = draws(n, 100 + static_cast<std::uint64_t>(x), [&](Rng& r) { return s.sample(x, r); });
    std::map<Count, double> count;
    for (Count u : v) count[u] += 1;
    int bad = 0;
    for (std::size_t i = 0; i < d.mass.size(); ++i) {
      const double p = d.mass[i];
      if (p < 1e-9) continue;
      const double f = count[d.support_offset + static_cast<Count>(i)] / static_cast<double>(n);
      if (std::abs(f - p) > 4 * std::sqrt(p * (1 - p) / static_cast<double>(n))) ++bad;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("all sampling paths agree with the exact law", "[kks][statistical]") {
  struct Case {
    const char* env;
    Count x;
  };
  // The first case exercises the period skipping; the second has cookies 0 and 1.
  for (const auto& c : {Case{"periodic:0.9,0.9,0.1,0.1", 1000}, Case{"periodic:1,0,0.6", 300},
                        Case{"periodic:0.25,0.75,0.8,0.2", 64}, Case{"tail:0.9,0.2@0.6", 50},
                        Case{"bounded:0.3,0.8", 40}}) {
    const auto env = parse_environment(c.env);
    const StepSampler s(env);
    const auto d = exact_U_distribution(env, c.x, 1e-14);
    const std::size_t n = 100'000;
    const double crit = 1.63 / std::sqrt(static_cast<double>(n));
    INFO(c.env);
    CHECK(ks_against(d, draws(n, 5, [&](Rng& r) { return s.sample(c.x, r); })) < crit);
    CHECK(ks_against(d, draws(n, 6, [&](Rng& r) { return s.sample_blocks(c.x, r); })) < crit);
    if (c.x <= 300)
      CHECK(ks_against(d, draws(n, 7, [&](Rng& r) { return s.sample_bernoulli(c.x, r); })) < crit);
    CHECK(ks_against(d, draws(n / 10, 8, [&](Rng& r) { return oracle::simulate_U(env, c.x, r); })) <
          1.63 / std::sqrt(static_cast<double>(n / 10)));
  }
}

TEST_CASE("large-x draws keep the right mean and variance", "[kks][statistical]") {
  const auto env = make_periodic({0.9, 0.9, 0.1, 0.1});
  const StepSampler s(env);
  for (Count x : {Count{100'000}, Count{10'000'000}}) {
    const auto v = draws(200'000, 21, [&](Rng& r) { return s.sample(x, r); });
    const auto dev = mean_se(v, [x](Count u) { return static_cast<double>(u - x); });
    CHECK(std::abs(dev.mean - 0.48) <= 4 * dev.se);
    const double var = dev.sd * dev.sd / static_cast<double>(x);
    CHECK_THAT(var, WithinRel(0.72, 0.02));
  }
}

TEST_CASE("concentration around mu x", "[kks][statistical]") {
  const auto env = make_periodic({0.9, 0.1});
  // Fit c in P[|U(x)/x - 1| > 0.1] <= 2 exp(-c (0.01 / 2.1) x) on exact tails.
  double sty = 0, stt = 0;
  for (Count x : {200, 400, 800}) {
    const auto d = exact_U_distribution(env, x, 1e-15);
    double tail = 0;
    for (std::size_t i = 0; i < d.mass.size(); ++i) {
      const double k = static_cast<double>(d.support_offset + static_cast<Count>(i));
      if (std::abs(k / static_cast<double>(x) - 1.0) > 0.1) tail += d.mass[i];
    }
    const double t = 0.01 / 2.1 * static_cast<double>(x);
    sty += t * -std::log(tail / 2.0);
    stt += t * t;
  }
  const double c = sty / stt;
  CHECK(c > 0.0);
  const Count x = 10'000;
  const StepSampler s(env);
  const auto v = draws(1'000'000, 3, [&](Rng& r) { return s.sample(x, r); });
  std::size_t far = 0;
  for (Count u : v) far += std::abs(static_cast<double>(u) / x - 1.0) > 0.1;
  const double freq = static_cast<double>(far) / static_cast<double>(v.size());
  CHECK(freq <= 2.0 * std::exp(-c * 0.01 / 2.1 * x));
  CHECK(freq < 1e-4);
}

TEST_CASE("chain summaries", "[kks]") {
  const auto env = make_periodic({0.9, 0.1});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto z = simulate_Z(env, seed % 2 ? Direction::Right : Direction::Left, 200, rng);
    CHECK(z.hit_zero_step.has_value() != z.survived);
    if (z.hit_zero_step) CHECK(*z.hit_zero_step <= 200);
  }
  Rng rng(4);
  CHECK_THROWS_AS(simulate_Z(env, Direction::Right, 0, rng), std::invalid_argument);
  const auto path = chain_path(StepSampler(env), 1000, rng);
  CHECK(path.front() == 1);
  CHECK((path.back() == 0 || path.size() == 1001));
}

TEST_CASE("supercritical chains survive and escape", "[kks][statistical]") {
  const auto pts = z_survival(make_periodic({0.7, 0.7}), Direction::Right, {10'000}, 10'000);
  CHECK(pts[0].frequency > 0.5);
  Rng rng(8);
  bool escaped = false;
  for (int i = 0; i < 20 && !escaped; ++i) escaped = simulate_Z(make_periodic({0.7, 0.7}), Direction::Right, 10'000, rng).escaped;
  CHECK(escaped);
}

TEST_CASE("fair stack gives a critical geometric branching chain", "[kks][statistical]") {
  // With geometric offspring of mean 1 the survival probability to generation n is 1/(n+1).
  const auto pts = z_survival(make_periodic({0.5}), Direction::Right, {100, 1000}, 20'000);
  CHECK(std::abs(pts[0].frequency - 1.0 / 101.0) <= 3 * pts[0].se);
  const double ratio = pts[0].frequency / pts[1].frequency;
  CHECK(ratio > 10.0 / 3.0);
  CHECK(ratio < 30.0);
}

TEST_CASE("recurrent and left chains die out", "[kks][statistical]") {
  const auto right = z_survival(make_periodic({0.9, 0.1}), Direction::Right, {1000, 10'000}, 2000);
  CHECK(right[1].frequency < 0.05);
  CHECK(right[1].frequency <= right[0].frequency);
  const auto left = z_survival(make_periodic({0.9, 0.9, 0.1, 0.1}), Direction::Left, {1000}, 2000);
  CHECK(left[0].frequency < 0.05);
}

TEST_CASE("empirical ladders", "[kks][statistical]") {
  {
    const auto l = empirical_ladder(make_periodic({0.9, 0.1}), {100, 1000, 10'000}, 1'000'000);
    REQUIRE(l.entries.size() == 3);
    for (const auto& e : l.entries) {
      CHECK(std::abs(e.rho_hat - 0.08) <= 3 * e.se_rho);
      CHECK(e.nu_hat > 0);
    }
  }
  {
    const auto l = empirical_ladder(make_periodic({0.5}), {50, 5000}, 100'000);
    for (const auto& e : l.entries) CHECK(std::abs(e.theta_hat) <= 3 * e.se_theta);
  }
  {
    const auto l = empirical_ladder(make_bounded({0.9, 0.9, 0.9}), {1000}, 1'000'000);
    CHECK(std::abs(l.entries[0].rho_hat - 2.4) <= 3 * l.entries[0].se_rho);
  }
}

TEST_CASE("ladder argument checks and determinism", "[kks]") {
  const auto env = make_periodic({0.6, 0.4});
  CHECK_THROWS_AS(empirical_ladder(env, {}, 1000), std::invalid_argument);
  CHECK_THROWS_AS(empirical_ladder(env, {10}, 99), std::invalid_argument);
  CHECK_THROWS_AS(empirical_ladder(env, {100, 100}, 1000), std::invalid_argument);
  const auto a = empirical_ladder(env, {10, 100}, 2000, {99, 1});
  const auto b = empirical_ladder(env, {10, 100}, 2000, {99, 3});
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.entries[i].rho_hat == b.entries[i].rho_hat);
    CHECK(a.entries[i].nu_hat == b.entries[i].nu_hat);
  }
}
