#pragma once

// Identically piled cookie environments p = (p_i), i >= 1, with finite
// descriptions: a repeating period, a finite prefix followed by fair
// cookies, or a finite prefix followed by a constant tail.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace erwlab {

enum class EnvKind { Periodic, Bounded, CustomTail };

inline const char* to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::Periodic: return "periodic";
    case EnvKind::Bounded: return "bounded";
    case EnvKind::CustomTail: return "tail";
  }
  return "?";
}

/// Exact value of a cookie given as a decimal or a fraction on input.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Ratio() = default;
  Ratio(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("ratio with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const auto g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Ratio complement() const { return Ratio(den - num, den); }
  bool operator==(const Ratio&) const = default;
};

using ExactRational = boost::multiprecision::cpp_rational;

inline ExactRational to_exact(const Ratio& r) { return ExactRational(r.num, r.den); }

struct EnvPredicates {
  bool elliptic = false;
  bool positive = false;
  bool bounded = false;
  bool periodic = false;
  bool non_degenerate = false;
};

class CookieEnvironment {
 public:
  static CookieEnvironment periodic(std::vector<double> p) {
    return CookieEnvironment(EnvKind::Periodic, std::move(p), 0.5, std::nullopt);
  }
  static CookieEnvironment bounded(std::vector<double> prefix) {
    return CookieEnvironment(EnvKind::Bounded, std::move(prefix), 0.5, std::nullopt);
  }
  /// Prefix followed by `tail` forever. `total_drift` is the caller-supplied
  /// closed form of sum(2p_i - 1) for positive stacks whose true tail is
  /// only asymptotically fair.
  static CookieEnvironment custom_tail(std::vector<double> prefix, double tail,
                                       std::optional<double> total_drift = std::nullopt) {
    return CookieEnvironment(EnvKind::CustomTail, std::move(prefix), tail, total_drift);
  }

  /// Attach exact values (same length as params, and the tail for CustomTail).
  CookieEnvironment with_exact(std::vector<Ratio> params, std::optional<Ratio> tail = std::nullopt) const {
    if (params.size() != params_.size())
      throw std::invalid_argument("exact values must match the cookie count");
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i].value() != params_[i])
        throw std::invalid_argument("exact value disagrees with cookie " + std::to_string(i + 1));
    CookieEnvironment out = *this;
    out.exact_ = std::move(params);
    if (kind_ == EnvKind::Bounded) out.exact_tail_ = Ratio(1, 2);
    else if (tail) out.exact_tail_ = *tail;
    return out;
  }

  EnvKind kind() const { return kind_; }
  std::size_t size() const { return params_.size(); }
  std::span<const double> params() const { return params_; }
  double tail_value() const { return tail_; }
  std::optional<double> declared_total_drift() const { return total_drift_; }
  const std::optional<std::vector<Ratio>>& exact() const { return exact_; }
  const std::optional<Ratio>& exact_tail() const { return exact_tail_; }

  /// The i-th cookie, i >= 1. Periodic stacks wrap with p_0 identified with p_M.
  double cookie_at(std::uint64_t i) const {
    if (i == 0) throw std::invalid_argument("cookie index starts at 1");
    const std::uint64_t m = params_.size();
    if (kind_ == EnvKind::Periodic) return params_[(i - 1) % m];
    return i <= m ? params_[i - 1] : tail_;
  }

  /// Zero-based cyclic position lookup; only meaningful for periodic stacks.
  double at_position(std::size_t pos) const { return params_[pos % params_.size()]; }

  CookieEnvironment mirror() const {
    std::vector<double> q(params_.size());
    std::transform(params_.begin(), params_.end(), q.begin(), [](double p) { return 1.0 - p; });
    // exact cookies give exact complements, so mirroring twice is the identity
    if (exact_)
      for (std::size_t i = 0; i < q.size(); ++i) q[i] = (*exact_)[i].complement().value();
    std::optional<double> drift;
    if (total_drift_) drift = -*total_drift_;
    CookieEnvironment out(kind_, std::move(q), exact_tail_ ? exact_tail_->complement().value() : 1.0 - tail_, drift);
    if (exact_) {
      std::vector<Ratio> e;
      for (const auto& r : *exact_) e.push_back(r.complement());
      out.exact_ = std::move(e);
    }
    if (exact_tail_) out.exact_tail_ = exact_tail_->complement();
    return out;
  }

  /// Cyclic rotation whose first cookie is the old p_j, 1 <= j <= M.
  CookieEnvironment shift(std::size_t j) const {
    if (kind_ != EnvKind::Periodic) throw std::invalid_argument("shift requires a periodic environment");
    if (j < 1 || j > params_.size()) throw std::invalid_argument("shift index out of range");
    auto q = params_;
    std::rotate(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(j - 1), q.end());
    CookieEnvironment out(kind_, std::move(q), tail_, total_drift_);
    if (exact_) {
      auto e = *exact_;
      std::rotate(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(j - 1), e.end());
      out.exact_ = std::move(e);
    }
    return out;
  }

  EnvPredicates predicates() const {
    EnvPredicates out;
    auto values = params_;
    if (kind_ != EnvKind::Periodic) values.push_back(tail_);
    out.elliptic = std::all_of(values.begin(), values.end(), [](double p) { return p > 0.0 && p < 1.0; });
    out.positive = std::all_of(values.begin(), values.end(), [](double p) { return p >= 0.5; });
    const bool all_fair = std::all_of(params_.begin(), params_.end(), [](double p) { return p == 0.5; });
    switch (kind_) {
      case EnvKind::Periodic:
        out.periodic = true;
        out.bounded = all_fair;
        out.non_degenerate =
            std::any_of(params_.begin(), params_.end(), [](double p) { return p > 0.0; }) &&
            std::any_of(params_.begin(), params_.end(), [](double p) { return p < 1.0; });
        break;
      case EnvKind::Bounded:
        out.bounded = true;
        out.periodic = all_fair;
        out.non_degenerate = true;
        break;
      case EnvKind::CustomTail:
        out.bounded = tail_ == 0.5 && !total_drift_;
        out.periodic = std::all_of(params_.begin(), params_.end(), [&](double p) { return p == tail_; });
        out.non_degenerate = tail_ > 0.0 && tail_ < 1.0;
        break;
    }
    return out;
  }

  /// Average cookie over a period, or the tail value for the eventually
  /// constant kinds.
  double mean_cookie() const {
    if (kind_ == EnvKind::Periodic)
      return std::accumulate(params_.begin(), params_.end(), 0.0) / static_cast<double>(params_.size());
    return tail_;
  }

  /// Exact average cookie when the environment carries exact values.
  std::optional<ExactRational> exact_mean_cookie() const {
    if (kind_ == EnvKind::Periodic) {
      if (!exact_) return std::nullopt;
      ExactRational sum = 0;
      for (const auto& r : *exact_) sum += to_exact(r);
      return sum / static_cast<long long>(exact_->size());
    }
    if (exact_tail_) return to_exact(*exact_tail_);
    if (kind_ == EnvKind::Bounded) return ExactRational(1, 2);
    return std::nullopt;
  }

  /// Total drift of the finite prefix, sum_{i<=M}(2p_i - 1).
  double prefix_drift() const {
    double d = 0.0;
    for (double p : params_) d += 2.0 * p - 1.0;
    return d;
  }

  bool operator==(const CookieEnvironment& o) const {
    return kind_ == o.kind_ && params_ == o.params_ && tail_ == o.tail_ && total_drift_ == o.total_drift_;
  }

 private:
  CookieEnvironment(EnvKind kind, std::vector<double> params, double tail, std::optional<double> drift)
      : kind_(kind), params_(std::move(params)), tail_(tail), total_drift_(drift) {
    if (params_.empty()) throw std::invalid_argument("environment needs at least one cookie");
    for (std::size_t i = 0; i < params_.size(); ++i) check_probability(params_[i], "cookie " + std::to_string(i + 1));
    if (kind_ == EnvKind::Bounded) tail_ = 0.5;
    check_probability(tail_, "tail value");
    if (total_drift_ && std::isnan(*total_drift_)) throw std::invalid_argument("total drift is NaN");
  }

  static void check_probability(double p, const std::string& what) {
    if (std::isnan(p) || p < 0.0 || p > 1.0)
      throw std::invalid_argument(what + " must lie in [0,1]");
  }

  EnvKind kind_;
  std::vector<double> params_;
  double tail_;
  std::optional<double> total_drift_;
  std::optional<std::vector<Ratio>> exact_;
  std::optional<Ratio> exact_tail_;
};

inline CookieEnvironment make_periodic(std::vector<double> p) { return CookieEnvironment::periodic(std::move(p)); }
inline CookieEnvironment make_bounded(std::vector<double> prefix) { return CookieEnvironment::bounded(std::move(prefix)); }
inline double cookie_at(const CookieEnvironment& env, std::uint64_t i) { return env.cookie_at(i); }
inline CookieEnvironment mirror(const CookieEnvironment& env) { return env.mirror(); }
inline CookieEnvironment shift(const CookieEnvironment& env, std::size_t j) { return env.shift(j); }
inline EnvPredicates predicates(const CookieEnvironment& env) { return env.predicates(); }

/// First M cookies of `p` are `p`, the next M are `1 - p`.
inline CookieEnvironment make_half_half(double p, std::size_t half_period) {
  std::vector<double> v(2 * half_period, 1.0 - p);
  std::fill_n(v.begin(), half_period, p);
  return make_periodic(std::move(v));
}

}  // namespace erwlab
