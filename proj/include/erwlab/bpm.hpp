#pragma once

// Branching processes with migration:
//   Z_{n+1} = max(xi_1 + ... + xi_{Z_n} + eta, 0) while Z_n > 0, and 0 is absorbing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "erwlab/kks.hpp"
#include "erwlab/stream.hpp"

namespace erwlab {

enum class OffspringFamily { Geometric, Poisson, Tabular };

/// Offspring law on the nonnegative integers.
class OffspringSpec {
 public:
  /// P[xi = k] = (1/(1+m)) (m/(1+m))^k.
  static OffspringSpec geometric(double mean) {
    check_mean(mean);
    return OffspringSpec(OffspringFamily::Geometric, mean, mean * (1.0 + mean), {});
  }
  static OffspringSpec poisson(double mean) {
    check_mean(mean);
    return OffspringSpec(OffspringFamily::Poisson, mean, mean, {});
  }
  /// masses[k] = P[xi = k].
  static OffspringSpec tabular(std::vector<double> masses) {
    const auto [m, v] = tabular_moments(masses, 0);
    return OffspringSpec(OffspringFamily::Tabular, m, v, std::move(masses));
  }

  OffspringFamily family() const { return family_; }
  double mu() const { return mu_; }
  double nu() const { return nu_; }
  const std::vector<double>& masses() const { return masses_; }

  /// Sum of z independent copies.
  Count sample_sum(Count z, Rng& rng) const {
    if (z <= 0) return 0;
    switch (family_) {
      case OffspringFamily::Geometric:
        if (mu_ == 0.0) return 0;
        return std::negative_binomial_distribution<Count>(z, 1.0 / (1.0 + mu_))(rng);
      case OffspringFamily::Poisson:
        if (mu_ == 0.0) return 0;
        return std::poisson_distribution<Count>(static_cast<double>(z) * mu_)(rng);
      case OffspringFamily::Tabular: {
        // multinomial split of z parents by sequential binomials
        Count left = z, total = 0;
        double mass_left = 1.0;
        for (std::size_t k = 0; k < masses_.size() && left > 0; ++k) {
          const double q = mass_left > 0.0 ? std::min(1.0, masses_[k] / mass_left) : 1.0;
          const Count n = k + 1 == masses_.size() ? left : std::binomial_distribution<Count>(left, q)(rng);
          total += n * static_cast<Count>(k);
          left -= n;
          mass_left -= masses_[k];
        }
        return total;
      }
    }
    return 0;
  }

  static std::pair<double, double> tabular_moments(const std::vector<double>& masses, Count offset) {
    if (masses.empty()) throw std::invalid_argument("tabular law needs at least one mass");
    double total = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      const double w = masses[i];
      if (std::isnan(w) || w < 0.0) throw std::invalid_argument("tabular masses must be nonnegative");
      const double k = static_cast<double>(offset + static_cast<Count>(i));
      total += w;
      m1 += w * k;
      m2 += w * k * k;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("tabular masses must sum to 1");
    return {m1, m2 - m1 * m1};
  }

 private:
  OffspringSpec(OffspringFamily f, double mu, double nu, std::vector<double> masses)
      : family_(f), mu_(mu), nu_(nu), masses_(std::move(masses)) {}

  static void check_mean(double m) {
    if (!std::isfinite(m) || m < 0.0) throw std::invalid_argument("offspring mean must be finite and >= 0");
  }

  OffspringFamily family_;
  double mu_;
  double nu_;
  std::vector<double> masses_;
};

enum class MigrationFamily { Deterministic, Tabular };

/// Integer-valued migration with finite support.
class MigrationSpec {
 public:
  static MigrationSpec deterministic(Count k) {
    return MigrationSpec(MigrationFamily::Deterministic, k, {1.0}, static_cast<double>(k),
                         static_cast<double>(k) * static_cast<double>(k));
  }
  /// masses[i] = P[eta = offset + i].
  static MigrationSpec tabular(Count offset, std::vector<double> masses) {
    const auto [m, v] = OffspringSpec::tabular_moments(masses, offset);
    return MigrationSpec(MigrationFamily::Tabular, offset, std::move(masses), m, v + m * m);
  }

  MigrationFamily family() const { return family_; }
  Count offset() const { return offset_; }
  const std::vector<double>& masses() const { return masses_; }
  double rho() const { return rho_; }
  double second_moment() const { return second_; }

  Count sample(Rng& rng) const {
    if (family_ == MigrationFamily::Deterministic) return offset_;
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < masses_.size(); ++i) {
      acc += masses_[i];
      if (u < acc) return offset_ + static_cast<Count>(i);
    }
    return offset_ + static_cast<Count>(masses_.size()) - 1;
  }

 private:
  MigrationSpec(MigrationFamily f, Count offset, std::vector<double> masses, double rho, double second)
      : family_(f), offset_(offset), masses_(std::move(masses)), rho_(rho), second_(second) {}

  MigrationFamily family_;
  Count offset_;
  std::vector<double> masses_;
  double rho_;
  double second_;
};

struct BpmModel {
  OffspringSpec offspring;
  MigrationSpec migration;

  double mu() const { return offspring.mu(); }
  double rho() const { return migration.rho(); }
  double nu() const { return offspring.nu(); }
  /// 2 rho / nu; undefined for deterministic offspring.
  std::optional<double> theta() const {
    if (!(nu() > 0.0)) return std::nullopt;
    return 2.0 * rho() / nu();
  }

  /// One step from z > 0, floored at 0.
  Count step(Count z, Rng& rng) const {
    const Count next = offspring.sample_sum(z, rng) + migration.sample(rng);
    return next > 0 ? next : 0;
  }
  Count operator()(Count z, Rng& rng) const { return step(z, rng); }
};

enum class BpmFate { Survives, DiesOut };

inline const char* to_string(BpmFate f) { return f == BpmFate::Survives ? "Survives" : "DiesOut"; }

inline constexpr double kCriticalMeanTolerance = 1e-12;

inline BpmFate classify_bpm(const BpmModel& m) {
  if (m.mu() > 1.0 + kCriticalMeanTolerance) return BpmFate::Survives;
  if (m.mu() < 1.0 - kCriticalMeanTolerance) return BpmFate::DiesOut;
  const auto theta = m.theta();
  if (!theta) throw std::invalid_argument("critical model with zero offspring variance");
  return *theta > 1.0 ? BpmFate::Survives : BpmFate::DiesOut;
}

/// Survival frequencies from Z_0 = 1 at each checkpoint horizon. Reaching
/// `escape_level` counts as surviving every checkpoint.
inline std::vector<SurvivalPoint> simulate_bpm(const BpmModel& model, std::vector<Count> checkpoints,
                                               std::uint64_t trials, const EnsembleOptions& opts = {},
                                               Count escape_level = kDefaultEscapeLevel) {
  if (checkpoints.empty()) throw std::invalid_argument("need at least one horizon");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  for (Count h : checkpoints)
    if (h < 1) throw std::invalid_argument("horizon must be >= 1");
  std::sort(checkpoints.begin(), checkpoints.end());
  const Count last = checkpoints.back();
  const auto runs = run_ensemble(trials, opts, [&](std::uint64_t, Rng& rng) {
    auto r = run_chain(model, Direction::Right, last, rng, escape_level);
    return r.hit_zero_step ? *r.hit_zero_step : last + 1;
  });
  std::vector<SurvivalPoint> out;
  for (Count h : checkpoints) {
    const auto s = mean_se(runs, [h](Count hit) { return hit > h ? 1.0 : 0.0; });
    out.push_back({h, s.mean, s.se});
  }
  return out;
}

/// Parses "geometric:m", "poisson:m" or "tabular:w0,w1,...".
inline OffspringSpec parse_offspring(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("offspring spec needs family:params");
  const auto fam = s.substr(0, colon);
  const auto body = s.substr(colon + 1);
  auto parse_list = [](const std::string& b) {
    std::vector<double> v;
    std::size_t start = 0;
    while (true) {
      const auto comma = b.find(',', start);
      v.push_back(std::stod(b.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return v;
  };
  if (fam == "geometric") return OffspringSpec::geometric(std::stod(body));
  if (fam == "poisson") return OffspringSpec::poisson(std::stod(body));
  if (fam == "tabular") return OffspringSpec::tabular(parse_list(body));
  throw std::invalid_argument("unknown offspring family '" + fam + "'");
}

/// Parses "const:k" or "tabular:offset:w0,w1,...".
inline MigrationSpec parse_migration(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("migration spec needs family:params");
  const auto fam = s.substr(0, colon);
  const auto body = s.substr(colon + 1);
  if (fam == "const") return MigrationSpec::deterministic(std::stoll(body));
  if (fam == "tabular") {
    const auto c2 = body.find(':');
    if (c2 == std::string::npos) throw std::invalid_argument("tabular migration needs offset:masses");
    std::vector<double> v;
    std::size_t start = c2 + 1;
    while (true) {
      const auto comma = body.find(',', start);
      v.push_back(std::stod(body.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return MigrationSpec::tabular(std::stoll(body.substr(0, c2)), std::move(v));
  }
  throw std::invalid_argument("unknown migration family '" + fam + "'");
}

}  // namespace erwlab
