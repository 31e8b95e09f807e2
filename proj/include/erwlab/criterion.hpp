#pragma once

// Recurrence/transience verdicts for chains on the nonnegative integers from
// ladder statistics of their step law, and Monte Carlo Lyapunov drifts.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "erwlab/kks.hpp"
#include "erwlab/stream.hpp"

namespace erwlab {

/// alpha(x) in the band half-widths alpha(x)/sqrt(x). All choices diverge.
enum class AlphaSchedule { Log, LogLog, SqrtLog };

inline const char* to_string(AlphaSchedule a) {
  switch (a) {
    case AlphaSchedule::Log: return "ln";
    case AlphaSchedule::LogLog: return "lnln";
    case AlphaSchedule::SqrtLog: return "sqrtln";
  }
  return "?";
}

inline AlphaSchedule parse_alpha_schedule(const std::string& s) {
  if (s == "ln") return AlphaSchedule::Log;
  if (s == "lnln") return AlphaSchedule::LogLog;
  if (s == "sqrtln") return AlphaSchedule::SqrtLog;
  throw std::invalid_argument("unknown alpha schedule '" + s + "' (ln, lnln, sqrtln)");
}

inline double alpha_at(AlphaSchedule a, double x) {
  switch (a) {
    case AlphaSchedule::Log: return std::log(x);
    case AlphaSchedule::LogLog: return std::log(std::log(x));
    case AlphaSchedule::SqrtLog: return std::sqrt(std::log(x));
  }
  return std::log(x);
}

inline double lower_band(double x, AlphaSchedule a = AlphaSchedule::Log) {
  return 1.0 + 1.0 / std::log(x) - alpha_at(a, x) / std::sqrt(x);
}

inline double upper_band(double x, AlphaSchedule a = AlphaSchedule::Log) {
  return 1.0 + 2.0 / std::log(x) + alpha_at(a, x) / std::sqrt(x);
}

struct CriterionInput {
  double mu = 1.0;
  double mu_se = 0.0;  // 0 means mu is exact
  LadderStats ladder;
  AlphaSchedule alpha = AlphaSchedule::Log;
  double z = 3.0;      // evidence threshold in standard errors
};

enum class VerdictValue { Transient, Recurrent, Inconclusive };

inline const char* to_string(VerdictValue v) {
  switch (v) {
    case VerdictValue::Transient: return "Transient";
    case VerdictValue::Recurrent: return "Recurrent";
    case VerdictValue::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct BandMargin {
  Count x = 0;
  double theta = 0.0;
  double se_theta = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double above_upper = 0.0;  // theta - z se - upper; positive means the point clears the transient band
  double below_lower = 0.0;  // lower - (theta + z se); positive means the point clears the recurrent band
};

struct Verdict {
  VerdictValue value = VerdictValue::Inconclusive;
  std::string branch;  // "mu>1", "mu<1", "upper-band", "lower-band", "between-bands"
  std::string rationale;
  std::vector<BandMargin> margins;
};

inline Verdict classify_chain(const CriterionInput& in) {
  if (in.ladder.entries.empty()) throw std::invalid_argument("criterion needs a nonempty ladder");
  for (const auto& e : in.ladder.entries)
    if (e.x < 10) throw std::invalid_argument("criterion needs ladder points with x >= 10");

  Verdict v;
  const double mu_slack = std::max(in.z * in.mu_se, 1e-12);
  std::ostringstream why;
  if (in.mu - 1.0 > mu_slack) {
    v.value = VerdictValue::Transient;
    v.branch = "mu>1";
    why << "mu = " << in.mu << " exceeds 1 by more than " << mu_slack;
    v.rationale = why.str();
    return v;
  }
  if (1.0 - in.mu > mu_slack) {
    v.value = VerdictValue::Recurrent;
    v.branch = "mu<1";
    why << "mu = " << in.mu << " is below 1 by more than " << mu_slack;
    v.rationale = why.str();
    return v;
  }

  bool all_above = true, all_below = true;
  for (const auto& e : in.ladder.entries) {
    BandMargin m;
    m.x = e.x;
    m.theta = e.theta_hat;
    m.se_theta = e.se_theta;
    const double x = static_cast<double>(e.x);
    m.lower = lower_band(x, in.alpha);
    m.upper = upper_band(x, in.alpha);
    m.above_upper = e.theta_hat - in.z * e.se_theta - m.upper;
    m.below_lower = m.lower - (e.theta_hat + in.z * e.se_theta);
    all_above = all_above && m.above_upper > 0.0;
    all_below = all_below && m.below_lower > 0.0;
    v.margins.push_back(m);
  }
  if (all_above) {
    v.value = VerdictValue::Transient;
    v.branch = "upper-band";
    why << "mu = 1 and theta clears the upper band at all " << v.margins.size() << " ladder points";
  } else if (all_below) {
    v.value = VerdictValue::Recurrent;
    v.branch = "lower-band";
    why << "mu = 1 and theta stays under the lower band at all " << v.margins.size() << " ladder points";
  } else {
    v.value = VerdictValue::Inconclusive;
    v.branch = "between-bands";
    why << "mu = 1 and theta is not separated from the bands at every ladder point";
  }
  v.rationale = why.str();
  return v;
}

/// Ladder with known constant theta and zero error, as produced from closed-form
/// periodic diagnostics.
inline LadderStats exact_theta_ladder(double theta, const std::vector<Count>& xs) {
  LadderStats out;
  for (Count x : xs) {
    LadderEntry e;
    e.x = x;
    e.trials = 1;
    e.theta_hat = theta;
    out.entries.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lyapunov functions

enum class LyapunovKind { Identity, Reciprocal, LogLog, InvLog };

inline const char* to_string(LyapunovKind k) {
  switch (k) {
    case LyapunovKind::Identity: return "identity";
    case LyapunovKind::Reciprocal: return "reciprocal";
    case LyapunovKind::LogLog: return "loglog";
    case LyapunovKind::InvLog: return "invlog";
  }
  return "?";
}

inline LyapunovKind parse_lyapunov_kind(const std::string& s) {
  if (s == "identity") return LyapunovKind::Identity;
  if (s == "reciprocal") return LyapunovKind::Reciprocal;
  if (s == "loglog") return LyapunovKind::LogLog;
  if (s == "invlog") return LyapunovKind::InvLog;
  throw std::invalid_argument("unknown Lyapunov kind '" + s + "' (identity, reciprocal, loglog, invlog)");
}

/// Smallest x at which V is evaluated directly; below it V continues linearly.
inline double lyapunov_guard(LyapunovKind k) {
  switch (k) {
    case LyapunovKind::LogLog: return 16.0;
    case LyapunovKind::InvLog: return 8.0;
    default: return 0.0;
  }
}

inline double lyapunov_value(LyapunovKind k, double x) {
  switch (k) {
    case LyapunovKind::Identity: return x;
    case LyapunovKind::Reciprocal: return 1.0 / (x + 1.0);
    case LyapunovKind::LogLog: {
      constexpr double g = 16.0;
      if (x >= g) return std::log(std::log(x));
      return std::log(std::log(g)) + (x - g) / (g * std::log(g));
    }
    case LyapunovKind::InvLog: {
      constexpr double g = 8.0;
      if (x >= g) return 1.0 / std::log(x);
      const double lg = std::log(g);
      return 1.0 / lg - (x - g) / (g * lg * lg);
    }
  }
  return x;
}

struct DriftEstimate {
  double drift = 0.0;  // E[V(U(x))] - V(x)
  double se = 0.0;
  double v_at_x = 0.0;
  std::uint64_t trials = 0;
};

/// Monte Carlo estimate of E[V(U(x))] - V(x) for any step sampler
/// `Count sampler(Count x, Rng&)`.
template <class Sampler>
DriftEstimate lyapunov_drift(const Sampler& sampler, LyapunovKind kind, Count x, std::uint64_t trials,
                             const EnsembleOptions& opts = {}) {
  if (trials < 2) throw std::invalid_argument("lyapunov_drift needs at least 2 trials");
  if (static_cast<double>(x) < lyapunov_guard(kind))
    throw std::invalid_argument(std::string(to_string(kind)) + " Lyapunov function needs x >= " +
                                std::to_string(static_cast<int>(lyapunov_guard(kind))));
  const double vx = lyapunov_value(kind, static_cast<double>(x));
  const auto values = run_ensemble(trials, opts, [&](std::uint64_t, Rng& rng) {
    return lyapunov_value(kind, static_cast<double>(sampler(x, rng))) - vx;
  });
  const auto s = mean_se(values);
  return {s.mean, s.se, vx, trials};
}

}  // namespace erwlab
