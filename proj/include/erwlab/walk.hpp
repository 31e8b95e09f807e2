#pragma once

// Direct simulation of the excited random walk on Z. On its j-th visit to a
// site (the current one included) the walk steps right with probability p_j.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <vector>

#include "erwlab/environment.hpp"
#include "erwlab/kks.hpp"
#include "erwlab/stream.hpp"

namespace erwlab {

/// Per-site storage indexed by an integer site, growing on both sides.
template <class T>
class TwoSidedArray {
 public:
  explicit TwoSidedArray(T fill) : fill_(fill) {}

  T& operator[](std::int64_t site) {
    auto& side = site >= 0 ? right_ : left_;
    const auto idx = static_cast<std::size_t>(site >= 0 ? site : -site - 1);
    if (idx >= side.size()) side.resize(std::max<std::size_t>(idx + 1, side.size() * 2), fill_);
    return side[idx];
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const auto& v : left_) fn(v);
    for (const auto& v : right_) fn(v);
  }

 private:
  T fill_;
  std::vector<T> left_, right_;
};

/// Full visit counts; works for every environment kind.
class FullCountTable {
 public:
  explicit FullCountTable(const CookieEnvironment& env) : env_(&env), counts_(0) {}

  /// Records an arrival at `site` and returns the cookie to use.
  double arrive(std::int64_t site) {
    auto& c = counts_[site];
    ++c;
    return env_->cookie_at(c);
  }

  std::uint64_t total() const {
    std::uint64_t s = 0;
    counts_.for_each([&](std::uint64_t c) { s += c; });
    return s;
  }

  std::uint64_t distinct_sites() const {
    std::uint64_t s = 0;
    counts_.for_each([&](std::uint64_t c) { s += c > 0; });
    return s;
  }

 private:
  const CookieEnvironment* env_;
  TwoSidedArray<std::uint64_t> counts_;
};

/// Compact table: visit counts modulo M for periodic stacks and saturating
/// past the prefix otherwise. -1 marks an unvisited site.
class CompactCountTable {
 public:
  explicit CompactCountTable(const CookieEnvironment& env)
      : env_(&env), periodic_(env.kind() == EnvKind::Periodic), m_(static_cast<std::int32_t>(env.size())), state_(-1) {}

  double arrive(std::int64_t site) {
    auto& s = state_[site];
    if (s < 0) ++distinct_;
    if (periodic_) {
      s = s < 0 ? 0 : (s + 1 == m_ ? 0 : s + 1);
      return env_->at_position(static_cast<std::size_t>(s));
    }
    // s = visit count, capped at M + 1 meaning "in the tail"
    if (s < 0) s = 1;
    else if (s <= m_) ++s;
    return s <= m_ ? env_->params()[static_cast<std::size_t>(s - 1)] : env_->tail_value();
  }

  std::uint64_t distinct_sites() const { return distinct_; }

 private:
  const CookieEnvironment* env_;
  bool periodic_;
  std::int32_t m_;
  TwoSidedArray<std::int32_t> state_;
  std::uint64_t distinct_ = 0;
};

struct WalkOptions {
  std::uint64_t emit_every = 0;     // record the position every m steps when > 0
  bool stop_at_minus1 = false;      // kill the walk on first arrival at -1
  bool record_crossings = false;    // right crossings of the edges (k-1, k), k >= 1
  bool reference_table = false;     // use the full-count table
};

struct WalkTrace {
  std::uint64_t steps = 0;
  std::int64_t final_position = 0;
  std::int64_t max_abs_position = 0;
  std::uint64_t returns_to_origin = 0;
  std::optional<std::uint64_t> first_hit_minus1;
  std::uint64_t distinct_sites = 0;
  std::optional<std::uint64_t> local_time_total;  // reference table only
  std::vector<std::int64_t> positions;              // emitted positions, step 0 first
  std::vector<Count> right_crossings;               // index k-1 holds edge (k-1, k)
};

namespace detail {

template <class Table>
WalkTrace run_walk_with(std::uint64_t steps, Rng& rng, const WalkOptions& opts, Table& table) {
  WalkTrace t;
  std::int64_t x = 0;
  if (opts.emit_every) t.positions.push_back(0);
  double p = table.arrive(0);
  for (std::uint64_t n = 1; n <= steps; ++n) {
    const bool right = uniform01(rng) < p;
    if (right && opts.record_crossings && x >= 0) {
      const auto k = static_cast<std::size_t>(x);
      if (t.right_crossings.size() <= k) t.right_crossings.resize(k + 1, 0);
      ++t.right_crossings[k];
    }
    x += right ? 1 : -1;
    t.steps = n;
    if (x == 0) ++t.returns_to_origin;
    t.max_abs_position = std::max<std::int64_t>(t.max_abs_position, std::llabs(x));
    if (opts.emit_every && n % opts.emit_every == 0) t.positions.push_back(x);
    if (x == -1 && !t.first_hit_minus1) {
      t.first_hit_minus1 = n;
      if (opts.stop_at_minus1) {
        p = table.arrive(x);
        break;
      }
    }
    p = table.arrive(x);
  }
  t.final_position = x;
  t.distinct_sites = table.distinct_sites();
  return t;
}

}  // namespace detail

inline WalkTrace run_walk(const CookieEnvironment& env, std::uint64_t steps, Rng& rng, const WalkOptions& opts = {}) {
  if (steps < 1) throw std::invalid_argument("walk needs at least one step");
  if (opts.reference_table) {
    FullCountTable table(env);
    auto t = detail::run_walk_with(steps, rng, opts, table);
    t.local_time_total = table.total();
    return t;
  }
  CompactCountTable table(env);
  return detail::run_walk_with(steps, rng, opts, table);
}

struct WalkSummary {
  std::uint64_t trials = 0;
  std::uint64_t steps = 0;
  MeanSe final_position;
  double final_q10 = 0.0, final_median = 0.0, final_q90 = 0.0;
  double fraction_positive = 0.0;
  MeanSe returns_to_origin;
  double returns_median = 0.0;
  double hit_minus1_frequency = 0.0;
  MeanSe max_abs_position;
};

namespace detail {

template <class T>
double quantile_of(std::vector<T> v, double q) {
  if (v.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1) + 0.5);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return static_cast<double>(v[k]);
}

}  // namespace detail

inline WalkSummary summarize_walks(const std::vector<WalkTrace>& traces) {
  WalkSummary s;
  s.trials = traces.size();
  if (traces.empty()) return s;
  s.steps = traces.front().steps;
  std::vector<std::int64_t> finals;
  std::vector<std::uint64_t> returns;
  std::uint64_t positive = 0, hits = 0;
  for (const auto& t : traces) {
    finals.push_back(t.final_position);
    returns.push_back(t.returns_to_origin);
    positive += t.final_position > 0;
    hits += t.first_hit_minus1.has_value();
  }
  s.final_position = mean_se(finals);
  s.final_q10 = detail::quantile_of(finals, 0.1);
  s.final_median = detail::quantile_of(finals, 0.5);
  s.final_q90 = detail::quantile_of(finals, 0.9);
  s.fraction_positive = static_cast<double>(positive) / static_cast<double>(traces.size());
  s.returns_to_origin = mean_se(returns);
  s.returns_median = detail::quantile_of(returns, 0.5);
  s.hit_minus1_frequency = static_cast<double>(hits) / static_cast<double>(traces.size());
  s.max_abs_position = mean_se(traces, [](const WalkTrace& t) { return static_cast<double>(t.max_abs_position); });
  return s;
}

inline std::vector<WalkTrace> run_walks(const CookieEnvironment& env, std::uint64_t steps, std::uint64_t trials,
                                        const EnsembleOptions& opts = {}, const WalkOptions& wopts = {}) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  return run_ensemble(trials, opts, [&](std::uint64_t, Rng& rng) { return run_walk(env, steps, rng, wopts); });
}

inline WalkSummary ensemble_summary(const CookieEnvironment& env, std::uint64_t steps, std::uint64_t trials,
                                    const EnsembleOptions& opts = {}) {
  return summarize_walks(run_walks(env, steps, trials, opts));
}

/// Right crossings of the edges (0,1), (1,2), ... made before the walk first
/// reaches -1, or nullopt when it has not done so within `max_steps`.
inline std::optional<std::vector<Count>> crossings_until_minus1(const CookieEnvironment& env, std::uint64_t max_steps,
                                                                Rng& rng) {
  WalkOptions o;
  o.stop_at_minus1 = true;
  o.record_crossings = true;
  auto t = run_walk(env, max_steps, rng, o);
  if (!t.first_hit_minus1) return std::nullopt;
  return std::move(t.right_crossings);
}

}  // namespace erwlab
