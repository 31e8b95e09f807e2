#pragma once

// The step distribution U_p(x) of the right-crossing chain: number of
// successes in Bernoulli(p_1), Bernoulli(p_2), ... trials before the x-th
// failure. Exact DP oracle, samplers, chain simulation and Monte Carlo
// ladders of rho(x), nu(x), theta(x).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/random/binomial_distribution.hpp>

#include "erwlab/environment.hpp"
#include "erwlab/periodic.hpp"
#include "erwlab/stream.hpp"

namespace erwlab {

using Count = std::int64_t;

// ---------------------------------------------------------------------------
// Exact distribution

struct UDistribution {
  Count x = 0;
  Count support_offset = 0;   // success count of mass[0]
  std::vector<double> mass;
  double tail_bound = 0.0;    // probability not represented in `mass`
  Count horizon = 0;          // trials propagated

  double total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

  double probability(Count k) const {
    const Count i = k - support_offset;
    return i < 0 || i >= static_cast<Count>(mass.size()) ? 0.0 : mass[static_cast<std::size_t>(i)];
  }

  /// E[(U - center)^power] over the represented mass.
  double moment(double center, int power) const {
    double s = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      const double d = static_cast<double>(support_offset + static_cast<Count>(i)) - center;
      s += mass[i] * std::pow(d, power);
    }
    return s;
  }
};

inline Count oracle_horizon_cap(const CookieEnvironment& env, Count x) {
  const double mu = asymptotic_mean(env);
  if (!std::isfinite(mu)) throw std::invalid_argument("oracle needs a finite asymptotic mean");
  return static_cast<Count>(64.0 * static_cast<double>(x + static_cast<Count>(env.size())) * (1.0 + mu));
}

/// Forward propagation of the failure count over trial index n. Live mass
/// sits on states f = 0..x-1; reaching f = x at trial n absorbs with n - x
/// successes. Stops once the live mass drops below tail_eps.
inline UDistribution exact_U_distribution(const CookieEnvironment& env, Count x, double tail_eps = 1e-12) {
  if (x < 1) throw std::invalid_argument("oracle needs x >= 1");
  if (!(tail_eps > 0.0)) throw std::invalid_argument("tail_eps must be positive");
  const Count cap = oracle_horizon_cap(env, x);

  // Entries that fall below this are dropped and booked to the tail bound,
  // which keeps the sweep clear of subnormals.
  constexpr double kNegligible = 1e-280;

  std::vector<double> live(static_cast<std::size_t>(x), 0.0);
  live[0] = 1.0;
  std::size_t lo = 0, hi = 0;  // nonzero window
  double dropped = 0.0;
  UDistribution out;
  out.x = x;
  std::vector<double> absorbed;

  for (Count n = 1;; ++n) {
    if (n > cap) throw std::runtime_error("oracle horizon cap exceeded; tail_eps too small or environment near-degenerate");
    const double p = env.cookie_at(static_cast<std::uint64_t>(n));
    const double q = 1.0 - p;
    // absorption from the top state
    const double hit = hi + 1 == static_cast<std::size_t>(x) ? live[hi] * q : 0.0;
    if (n >= x) absorbed.push_back(hit);
    const std::size_t new_hi = std::min<std::size_t>(hi + 1, static_cast<std::size_t>(x) - 1);
    if (new_hi > hi) live[new_hi] = live[hi] * q;
    for (std::size_t f = hi; f > lo; --f) live[f] = live[f] * p + live[f - 1] * q;
    live[lo] *= p;
    hi = new_hi;
    while (lo < hi && live[lo] < kNegligible) {
      dropped += live[lo];
      live[lo] = 0.0;
      ++lo;
    }
    double remaining = 0.0;
    for (std::size_t f = lo; f <= hi; ++f) remaining += live[f];
    if (n >= x && remaining + dropped < tail_eps) {
      out.horizon = n;
      out.tail_bound = remaining + dropped;
      break;
    }
  }
  // trim leading exact zeros (possible for degenerate cookies)
  std::size_t first = 0;
  while (first + 1 < absorbed.size() && absorbed[first] == 0.0) ++first;
  out.support_offset = static_cast<Count>(first);
  out.mass.assign(absorbed.begin() + static_cast<std::ptrdiff_t>(first), absorbed.end());
  return out;
}

struct ExactMoments {
  double mean = 0.0;
  double rho = 0.0;         // mean - mu x
  double nu = 0.0;          // E[(U - mu x)^2] / x
  double mu = 0.0;
  double error_bound = 0.0; // tail_bound * cap^2
};

inline ExactMoments exact_moments(const CookieEnvironment& env, Count x, double tail_eps = 1e-13) {
  const auto dist = exact_U_distribution(env, x, tail_eps);
  ExactMoments m;
  m.mu = asymptotic_mean(env);
  const double center = m.mu * static_cast<double>(x);
  m.mean = dist.moment(0.0, 1);
  m.rho = dist.moment(center, 1);
  m.nu = dist.moment(center, 2) / static_cast<double>(x);
  const double cap = static_cast<double>(oracle_horizon_cap(env, x));
  m.error_bound = dist.tail_bound * cap * cap;
  return m;
}

// ---------------------------------------------------------------------------
// Sampling

/// Precomputed sampler for U_p(x).
///
/// Periodic stacks draw one block per failure: the number of complete
/// cycles is geometric with ratio p_1...p_M and the failure offset inside
/// the cycle comes from a per-state table. For large x, whole periods are
/// skipped with one binomial per cookie position while the failure count
/// stays safely below x. Bounded and tail stacks walk the prefix and finish
/// with one negative binomial draw.
class StepSampler {
 public:
  explicit StepSampler(CookieEnvironment env) : env_(std::move(env)) {
    const auto p = env_.params();
    if (env_.kind() == EnvKind::Periodic) {
      if (std::all_of(p.begin(), p.end(), [](double v) { return v == 1.0; }))
        throw std::invalid_argument("every cookie is 1: U(x) never terminates");
      const std::size_t M = p.size();
      double log_all = 0.0;
      bool has_zero = false;
      for (double v : p) {
        if (v == 0.0) has_zero = true;
        else log_all += std::log(v);
      }
      all_ = has_zero ? 0.0 : std::exp(log_all);
      cycle_fail_ = has_zero ? 1.0 : -std::expm1(log_all);
      cum_.assign(M * M, 0.0);
      for (std::size_t j = 0; j < M; ++j) {
        double log_a = 0.0, acc = 0.0;
        bool zero = false;
        for (std::size_t r = 0; r < M; ++r) {
          const double cur = p[(j + r) % M];
          const double w = zero ? 0.0 : std::exp(log_a) * (1.0 - cur) / cycle_fail_;
          acc += w;
          cum_[j * M + r] = acc;
          if (cur == 0.0) zero = true;
          else log_a += std::log(cur);
        }
        for (std::size_t r = 0; r < M; ++r) cum_[j * M + r] /= acc;
        cum_[j * M + M - 1] = 1.0;
      }
      for (double v : p) {
        fail_per_period_ += 1.0 - v;
        var_per_period_ += v * (1.0 - v);
        const auto it = std::find(group_q_.begin(), group_q_.end(), 1.0 - v);
        if (it == group_q_.end()) {
          group_of_.push_back(group_q_.size());
          group_q_.push_back(1.0 - v);
          group_size_.push_back(1);
        } else {
          const auto g = static_cast<std::size_t>(it - group_q_.begin());
          group_of_.push_back(g);
          ++group_size_[g];
        }
      }
    } else if (env_.tail_value() == 1.0) {
      throw std::invalid_argument("tail cookie is 1: U(x) never terminates");
    }
  }

  const CookieEnvironment& environment() const { return env_; }

  Count operator()(Count x, Rng& rng) const { return sample(x, rng); }

  /// Exact draw, fastest available path.
  Count sample(Count x, Rng& rng) const {
    if (x <= 0) return 1;
    if (env_.kind() != EnvKind::Periodic) return sample_prefix_tail(x, rng);
    Count successes = 0;
    std::size_t pos = 0;
    Count need = x;
    skip_periods(need, pos, successes, rng);
    return successes + blocks_from(need, pos, rng);
  }

  /// One block per failure, O(x).
  Count sample_blocks(Count x, Rng& rng) const {
    if (x <= 0) return 1;
    if (env_.kind() != EnvKind::Periodic) return sample_prefix_tail(x, rng);
    return blocks_from(x, 0, rng);
  }

  /// Bernoulli trial by trial; the slow reference path.
  Count sample_bernoulli(Count x, Rng& rng) const {
    if (x <= 0) return 1;
    Count failures = 0, successes = 0;
    for (std::uint64_t n = 1; failures < x; ++n) {
      if (uniform01(rng) < env_.cookie_at(n)) ++successes;
      else ++failures;
    }
    return successes;
  }

 private:
  Count blocks_from(Count need, std::size_t pos, Rng& rng) const {
    const auto M = env_.size();
    Count successes = 0;
    std::geometric_distribution<Count> cycles(cycle_fail_);
    for (Count i = 0; i < need; ++i) {
      // No complete cycle with probability cycle_fail_; then u / cycle_fail_
      // is a fresh uniform for the offset.
      double u = uniform01(rng);
      Count c = 0;
      if (u < cycle_fail_) {
        u /= cycle_fail_;
      } else {
        c = 1 + cycles(rng);
        u = uniform01(rng);
      }
      const double* row = cum_.data() + pos * M;
      const auto r = static_cast<std::size_t>(std::upper_bound(row, row + M - 1, u) - row);
      successes += c * static_cast<Count>(M) + static_cast<Count>(r);
      pos = (pos + r + 1) % M;
    }
    return successes;
  }

  // Skips K whole periods while failures stay below `need` with high
  // probability; an overshoot is resolved exactly from the sampled counts.
  // Positions sharing a cookie value share one binomial draw.
  void skip_periods(Count& need, std::size_t& pos, Count& successes, Rng& rng) const {
    constexpr double kMarginSd = 3.0;
    const auto M = static_cast<Count>(env_.size());
    const std::size_t G = group_q_.size();
    std::vector<Count> counts(G), slots(G);
    while (true) {
      const double r = static_cast<double>(need);
      const double k_mean = r / fail_per_period_;
      const double sd = std::sqrt(k_mean * var_per_period_);
      const auto K = static_cast<Count>(std::floor((r - kMarginSd * sd - 1.0) / fail_per_period_));
      if (K < 4) return;
      Count failures = 0;
      for (std::size_t g = 0; g < G; ++g) {
        const double q = group_q_[g];
        const Count n = K * group_size_[g];
        const Count f = q <= 0.0 ? 0 : q >= 1.0 ? n : boost::random::binomial_distribution<Count, double>(n, q)(rng);
        counts[g] = f;
        slots[g] = n;
        failures += f;
      }
      if (failures < need) {
        need -= failures;
        successes += K * M - failures;
        continue;
      }
      // Overshoot. Given its count, the failure slots of a group form a
      // uniform subset, so the latest failures can be drawn by selection
      // sampling backwards from the last period. The need-th failure is the
      // (failures - need + 1)-th one counted from the end.
      const Count from_end = failures - need + 1;
      Count seen = 0, t = -1;
      for (Count k = K - 1; k >= 0 && t < 0; --k) {
        for (Count i = M - 1; i >= 0; --i) {
          const auto g = group_of_[static_cast<std::size_t>((static_cast<Count>(pos) + i) % M)];
          auto& left = counts[g];
          auto& rem = slots[g];
          const bool hit = left > 0 && uniform01(rng) * static_cast<double>(rem) < static_cast<double>(left);
          --rem;
          if (!hit) continue;
          --left;
          if (++seen == from_end) {
            t = k * M + i;
            break;
          }
        }
      }
      successes += t + 1 - need;
      pos = static_cast<std::size_t>((static_cast<Count>(pos) + t + 1) % M);
      need = 0;
      return;
    }
  }

  Count sample_prefix_tail(Count x, Rng& rng) const {
    const auto p = env_.params();
    Count failures = 0, successes = 0;
    for (double v : p) {
      if (uniform01(rng) < v) ++successes;
      else if (++failures == x) return successes;
    }
    const double tail = env_.tail_value();
    if (tail == 0.0) return successes;
    // successes before (x - failures) more failures
    return successes + std::negative_binomial_distribution<Count>(x - failures, 1.0 - tail)(rng);
  }

  CookieEnvironment env_;
  double all_ = 0.0;
  double cycle_fail_ = 1.0;
  double fail_per_period_ = 0.0;
  double var_per_period_ = 0.0;
  std::vector<double> cum_;
  std::vector<double> group_q_;         // distinct failure probabilities
  std::vector<Count> group_size_;       // positions per group
  std::vector<std::size_t> group_of_;   // group of each position
};

/// One draw of U_p(x); U_p(0) = 1.
inline Count sample_U(const CookieEnvironment& env, Count x, Rng& rng) {
  if (x <= 0) return 1;
  return StepSampler(env).sample(x, rng);
}

// ---------------------------------------------------------------------------
// The right/left crossing chains

enum class Direction { Right, Left };

inline const char* to_string(Direction d) { return d == Direction::Right ? "right" : "left"; }

struct ZRunSummary {
  Direction direction = Direction::Right;
  Count horizon = 0;
  std::optional<Count> hit_zero_step;
  bool survived = false;
  bool escaped = false;  // survival declared once the chain reached the escape level
};

inline constexpr Count kDefaultEscapeLevel = Count{1} << 40;

/// Iterates Z_0 = 1, Z_{n+1} ~ U(Z_n) with 0 absorbing. A run that reaches
/// `escape_level` counts as surviving.
template <class Sampler>
ZRunSummary run_chain(const Sampler& sampler, Direction direction, Count horizon, Rng& rng,
                      Count escape_level = kDefaultEscapeLevel) {
  ZRunSummary out;
  out.direction = direction;
  out.horizon = horizon;
  Count z = 1;
  for (Count n = 1; n <= horizon; ++n) {
    z = sampler(z, rng);
    if (z == 0) {
      out.hit_zero_step = n;
      return out;
    }
    if (z >= escape_level) {
      out.escaped = true;
      break;
    }
  }
  out.survived = true;
  return out;
}

inline ZRunSummary simulate_Z(const CookieEnvironment& env, Direction direction, Count horizon, Rng& rng,
                              Count escape_level = kDefaultEscapeLevel) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const StepSampler sampler(direction == Direction::Right ? env : env.mirror());
  return run_chain(sampler, direction, horizon, rng, escape_level);
}

/// Trajectory Z_0, Z_1, ... up to and including the first 0, or max_steps values.
template <class Sampler>
std::vector<Count> chain_path(const Sampler& sampler, Count max_steps, Rng& rng) {
  std::vector<Count> path{1};
  Count z = 1;
  for (Count n = 1; n <= max_steps && z > 0; ++n) {
    z = sampler(z, rng);
    path.push_back(z);
  }
  return path;
}

struct SurvivalPoint {
  Count horizon = 0;
  double frequency = 0.0;
  double se = 0.0;
};

/// Survival frequencies of an ensemble at increasing checkpoints; each run
/// is simulated once up to the last checkpoint.
inline std::vector<SurvivalPoint> z_survival(const CookieEnvironment& env, Direction direction,
                                             std::vector<Count> checkpoints, std::uint64_t trials,
                                             const EnsembleOptions& opts = {},
                                             Count escape_level = kDefaultEscapeLevel) {
  if (checkpoints.empty()) throw std::invalid_argument("need at least one checkpoint");
  std::sort(checkpoints.begin(), checkpoints.end());
  const StepSampler sampler(direction == Direction::Right ? env : env.mirror());
  const Count last = checkpoints.back();
  const auto runs = run_ensemble(trials, opts, [&](std::uint64_t, Rng& rng) {
    auto r = run_chain(sampler, direction, last, rng, escape_level);
    return r.hit_zero_step ? *r.hit_zero_step : last + 1;
  });
  std::vector<SurvivalPoint> out;
  for (Count h : checkpoints) {
    const auto s = mean_se(runs, [h](Count hit) { return hit > h ? 1.0 : 0.0; });
    out.push_back({h, s.mean, s.se});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo ladders

struct LadderEntry {
  Count x = 0;
  std::uint64_t trials = 0;
  double rho_hat = 0.0;
  double nu_hat = 0.0;
  double theta_hat = 0.0;
  double se_rho = 0.0;
  double se_nu = 0.0;
  double se_theta = 0.0;
};

struct LadderStats {
  std::vector<LadderEntry> entries;
};

/// Estimates rho(x) = E[U(x) - mu x], nu(x) = E[(U(x) - mu x)^2]/x and
/// theta(x) = 2 rho(x)/nu(x) for each x, with plug-in standard errors and a
/// first-order delta-method error for theta.
template <class Sampler>
LadderStats empirical_ladder(const Sampler& sampler, double mu, const std::vector<Count>& xs, std::uint64_t trials,
                             const EnsembleOptions& opts = {}) {
  if (xs.empty()) throw std::invalid_argument("ladder needs at least one x");
  if (trials < 100) throw std::invalid_argument("ladder needs at least 100 trials per x");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] <= xs[i - 1]) throw std::invalid_argument("ladder x values must be strictly increasing");
  LadderStats out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Count x = xs[k];
    EnsembleOptions sub = opts;
    sub.master_seed = substream_seed(opts.master_seed, 0x1add'e400ULL + k);
    const auto draws = run_ensemble(trials, sub, [&](std::uint64_t, Rng& rng) { return sampler(x, rng); });
    const double center = mu * static_cast<double>(x);
    const double xd = static_cast<double>(x);
    const auto dev = mean_se(draws, [center](Count u) { return static_cast<double>(u) - center; });
    const auto sq = mean_se(draws, [center, xd](Count u) {
      const double d = static_cast<double>(u) - center;
      return d * d / xd;
    });
    if (!(sq.mean > 0.0)) throw ConsistencyError("zero diffusion estimate at x = " + std::to_string(x));
    LadderEntry e;
    e.x = x;
    e.trials = trials;
    e.rho_hat = dev.mean;
    e.se_rho = dev.se;
    e.nu_hat = sq.mean;
    e.se_nu = sq.se;
    e.theta_hat = 2.0 * e.rho_hat / e.nu_hat;
    const double dr = 2.0 * e.se_rho / e.nu_hat;
    const double dn = 2.0 * e.rho_hat * e.se_nu / (e.nu_hat * e.nu_hat);
    e.se_theta = std::sqrt(dr * dr + dn * dn);
    out.entries.push_back(e);
  }
  return out;
}

inline LadderStats empirical_ladder(const CookieEnvironment& env, const std::vector<Count>& xs, std::uint64_t trials,
                                    const EnsembleOptions& opts = {}) {
  return empirical_ladder(StepSampler(env), asymptotic_mean(env), xs, trials, opts);
}

}  // namespace erwlab
