#pragma once

// Closed-form analysis of periodic cookie environments, the bounded and
// positive classifiers, and the dispatcher over all environment kinds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "erwlab/environment.hpp"

namespace erwlab {

/// Raised when two independent routes to the same quantity disagree.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Classification { TransientRight, TransientLeft, Recurrent };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::TransientRight: return "TransientRight";
    case Classification::TransientLeft: return "TransientLeft";
    case Classification::Recurrent: return "Recurrent";
  }
  return "?";
}

inline constexpr double kCriticalTolerance = 1e-12;

namespace detail {

inline void require_periodic(const CookieEnvironment& env, const char* what) {
  if (env.kind() != EnvKind::Periodic) throw std::invalid_argument(std::string(what) + " requires a periodic environment");
}

inline void require_elliptic(const CookieEnvironment& env, const char* what) {
  if (!env.predicates().elliptic) throw std::invalid_argument(std::string(what) + " requires an elliptic environment");
}

}  // namespace detail

inline double p_bar(const CookieEnvironment& env) {
  detail::require_periodic(env, "p_bar");
  return env.mean_cookie();
}

/// True when the average cookie is 1/2; exact when the environment carries
/// exact values, otherwise within kCriticalTolerance.
inline bool is_critical(const CookieEnvironment& env) {
  if (auto exact = env.exact_mean_cookie()) return *exact == ExactRational(1, 2);
  return std::abs(env.mean_cookie() - 0.5) <= kCriticalTolerance;
}

/// delta_i = sum_{j<=i} (2 p_j - 1), i = 1..M.
inline std::vector<double> prefix_drifts(const CookieEnvironment& env) {
  detail::require_periodic(env, "prefix_drifts");
  std::vector<double> delta;
  double acc = 0.0;
  for (double p : env.params()) {
    acc += 2.0 * p - 1.0;
    delta.push_back(acc);
  }
  return delta;
}

/// Asymptotic mean p/(1-p) of the step distribution; +inf when every cookie is 1.
inline double mu_periodic(const CookieEnvironment& env) {
  const double pb = p_bar(env);
  if (pb >= 1.0) return std::numeric_limits<double>::infinity();
  return pb / (1.0 - pb);
}

/// Asymptotic mean for any kind: periodic average or the tail value.
inline double asymptotic_mean(const CookieEnvironment& env) {
  const double pb = env.mean_cookie();
  if (pb >= 1.0) return std::numeric_limits<double>::infinity();
  return pb / (1.0 - pb);
}

struct FailureChain {
  std::size_t M = 0;
  std::vector<std::vector<double>> P;  // P[j][k], zero-based states
  std::vector<double> pi;
  std::vector<double> E;               // E[j] = expected successes before the first failure from state j
};

/// Stationary law of a row-stochastic matrix by power iteration.
inline std::vector<double> stationary_power_iteration(const std::vector<std::vector<double>>& P,
                                                      double tol = 1e-13, std::size_t max_iter = 1'000'000) {
  const std::size_t M = P.size();
  std::vector<double> v(M, 1.0 / static_cast<double>(M)), next(M);
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t j = 0; j < M; ++j)
      for (std::size_t k = 0; k < M; ++k) next[k] += v[j] * P[j][k];
    const double s = std::accumulate(next.begin(), next.end(), 0.0);
    double diff = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
      next[k] /= s;
      diff = std::max(diff, std::abs(next[k] - v[k]));
    }
    v.swap(next);
    if (diff < tol) return v;
  }
  throw ConsistencyError("power iteration did not converge");
}

/// Chain of the next-cookie position modulo M after each failure.
///
/// From state j the first failure happens r = 0..M-1 cookies later (mod M)
/// with weight a(r) (1 - p_{j+r}) / (1 - p_1...p_M), where a(r) is the cyclic
/// product of the r cookies starting at j; the next state is j + r + 1.
/// Products are accumulated in log space once M exceeds 64.
inline FailureChain failure_chain(const CookieEnvironment& env) {
  detail::require_periodic(env, "failure_chain");
  detail::require_elliptic(env, "failure_chain");
  const auto p = env.params();
  const std::size_t M = p.size();
  const bool logspace = M > 64;

  double log_all = 0.0;
  for (double v : p) log_all += std::log(v);
  const double all = logspace ? std::exp(log_all) : std::accumulate(p.begin(), p.end(), 1.0, std::multiplies<>());
  const double one_minus_all = logspace ? -std::expm1(log_all) : 1.0 - all;

  FailureChain fc;
  fc.M = M;
  fc.P.assign(M, std::vector<double>(M, 0.0));
  fc.E.assign(M, 0.0);
  for (std::size_t j = 0; j < M; ++j) {
    double a = 1.0, log_a = 0.0, partial_sum = 0.0;
    for (std::size_t r = 0; r < M; ++r) {
      const double cur = p[(j + r) % M];
      const double weight = logspace ? std::exp(log_a) : a;
      fc.P[j][(j + r + 1) % M] = weight * (1.0 - cur) / one_minus_all;
      if (logspace) log_a += std::log(cur);
      else a *= cur;
      partial_sum += logspace ? std::exp(log_a) : a;
    }
    fc.E[j] = partial_sum / one_minus_all;
  }

  // pi_j = (1 - p_{j-1}) / sum_k (1 - p_k), with p_0 identified with p_M.
  double total_fail = 0.0;
  for (double v : p) total_fail += 1.0 - v;
  fc.pi.resize(M);
  for (std::size_t j = 0; j < M; ++j) fc.pi[j] = (1.0 - p[(j + M - 1) % M]) / total_fail;

  const auto pi_iter = stationary_power_iteration(fc.P);
  for (std::size_t j = 0; j < M; ++j)
    if (std::abs(pi_iter[j] - fc.pi[j]) > 1e-10)
      throw ConsistencyError("closed-form stationary law disagrees with power iteration at state " + std::to_string(j + 1));
  return fc;
}

/// Limiting drift rho = (2/M) sum_i (1 - p_i) delta_i; defined only when the
/// average cookie is 1/2.
inline double rho_periodic(const CookieEnvironment& env) {
  detail::require_periodic(env, "rho_periodic");
  if (!is_critical(env)) throw std::domain_error("rho is defined only when the average cookie is 1/2");
  const auto p = env.params();
  const auto delta = prefix_drifts(env);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (1.0 - p[i]) * delta[i];
  return 2.0 * s / static_cast<double>(p.size());
}

/// Limiting diffusion 8A with A the period average of p_i (1 - p_i).
inline double nu_periodic(const CookieEnvironment& env) {
  detail::require_periodic(env, "nu_periodic");
  detail::require_elliptic(env, "nu_periodic");
  if (!is_critical(env)) throw std::domain_error("nu is defined only when the average cookie is 1/2");
  double s = 0.0;
  for (double p : env.params()) s += p * (1.0 - p);
  return 8.0 * s / static_cast<double>(env.size());
}

/// theta = 2 rho / nu.
inline double theta_periodic(const CookieEnvironment& env) { return 2.0 * rho_periodic(env) / nu_periodic(env); }

/// rho^{(j)} for every cyclic shift j = 1..M.
inline std::vector<double> shifted_rhos(const CookieEnvironment& env) {
  std::vector<double> out;
  for (std::size_t j = 1; j <= env.size(); ++j) out.push_back(rho_periodic(env.shift(j)));
  return out;
}

struct PeriodicDiagnostics {
  double p_bar = 0.0;
  std::vector<double> delta;
  double mu = 0.0;
  std::optional<double> rho;
  std::optional<double> nu;
  std::optional<double> theta_right;
  std::optional<double> theta_left;
  double A = 0.0;
};

inline PeriodicDiagnostics periodic_diagnostics(const CookieEnvironment& env) {
  PeriodicDiagnostics d;
  d.p_bar = p_bar(env);
  d.delta = prefix_drifts(env);
  d.mu = mu_periodic(env);
  for (double p : env.params()) d.A += p * (1.0 - p);
  d.A /= static_cast<double>(env.size());
  if (is_critical(env)) {
    d.rho = rho_periodic(env);
    if (env.predicates().elliptic) {
      d.nu = nu_periodic(env);
      d.theta_right = 2.0 * *d.rho / *d.nu;
      d.theta_left = theta_periodic(env.mirror());
    }
  }
  return d;
}

/// Recurrence/transience of the walk in an elliptic periodic environment.
/// theta exactly 1 falls in the recurrent branch.
inline Classification classify_periodic(const CookieEnvironment& env) {
  detail::require_periodic(env, "classify_periodic");
  detail::require_elliptic(env, "classify_periodic");
  if (!is_critical(env)) return env.mean_cookie() > 0.5 ? Classification::TransientRight : Classification::TransientLeft;
  if (theta_periodic(env) > 1.0) return Classification::TransientRight;
  if (theta_periodic(env.mirror()) > 1.0) return Classification::TransientLeft;
  return Classification::Recurrent;
}

/// Period length above which the half-p / half-(1-p) stack is right transient.
inline double half_half_threshold(double p) {
  if (!(p > 0.5) || !(p < 1.0)) throw std::domain_error("half_half_threshold requires p in (1/2, 1)");
  return (8.0 * p - 8.0 * p * p + 2.0) / (2.0 * p - 1.0);
}

inline Classification classify_by_total_drift(double delta) {
  if (delta > 1.0) return Classification::TransientRight;
  if (delta < -1.0) return Classification::TransientLeft;
  return Classification::Recurrent;
}

/// Finitely many biased cookies: only the total drift matters.
inline Classification classify_bounded(const CookieEnvironment& env) {
  if (!env.predicates().bounded || env.kind() == EnvKind::Periodic)
    throw std::invalid_argument("classify_bounded requires a bounded environment");
  detail::require_elliptic(env, "classify_bounded");
  return classify_by_total_drift(env.prefix_drift());
}

/// Positive stacks: right transient iff the total drift exceeds 1.
inline Classification classify_positive(double delta) {
  if (std::isnan(delta) || delta < 0.0) throw std::invalid_argument("total drift of a positive environment is >= 0");
  return delta > 1.0 ? Classification::TransientRight : Classification::Recurrent;
}

/// Dispatch over environment kinds.
inline Classification classify(const CookieEnvironment& env) {
  switch (env.kind()) {
    case EnvKind::Periodic: return classify_periodic(env);
    case EnvKind::Bounded: return classify_bounded(env);
    case EnvKind::CustomTail: {
      detail::require_elliptic(env, "classify");
      const double tail = env.tail_value();
      if (tail > 0.5) return Classification::TransientRight;
      if (tail < 0.5) return Classification::TransientLeft;
      if (auto delta = env.declared_total_drift()) {
        if (!env.predicates().positive)
          throw std::invalid_argument("a declared total drift is supported for positive environments only");
        return classify_positive(*delta);
      }
      return classify_by_total_drift(env.prefix_drift());
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace erwlab
