#pragma once

// Seeded random streams and the deterministic ensemble runner.
//
// Every trial t of an ensemble draws from its own engine seeded by
// substream_seed(master, t). Results are stored per trial index and reduced
// in index order, so output never depends on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <utility>
#include <vector>

namespace erwlab {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 0x5eed'c00c'1e5ULL;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_stream(std::uint64_t master, std::uint64_t index) { return Rng(substream_seed(master, index)); }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

struct EnsembleOptions {
  std::uint64_t master_seed = kDefaultSeed;
  unsigned threads = 1;
};

/// Runs fn(trial_index, rng) for every trial and returns results in trial order.
template <class Fn>
auto run_ensemble(std::uint64_t trials, const EnsembleOptions& opts, Fn&& fn) {
  using Result = decltype(fn(std::uint64_t{0}, std::declval<Rng&>()));
  std::vector<Result> out(trials);
  const unsigned workers = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(std::max<std::uint64_t>(trials, 1))));
  auto body = [&](std::uint64_t t) {
    Rng rng = make_stream(opts.master_seed, t);
    out[t] = fn(t, rng);
  };
  if (workers == 1) {
    for (std::uint64_t t = 0; t < trials; ++t) body(t);
    return out;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::uint64_t t = next++; t < trials; t = next++) body(t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = trials;
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Mean and standard error of a sample, accumulated in index order.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
  std::uint64_t n = 0;
};

template <class Range, class Proj>
MeanSe mean_se(const Range& values, Proj proj) {
  MeanSe out;
  double mean = 0.0, m2 = 0.0;
  std::uint64_t n = 0;
  for (const auto& v : values) {
    const double y = proj(v);
    ++n;
    const double d = y - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (y - mean);
  }
  out.n = n;
  out.mean = mean;
  out.sd = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
  out.se = n > 0 ? out.sd / std::sqrt(static_cast<double>(n)) : 0.0;
  return out;
}

template <class Range>
MeanSe mean_se(const Range& values) {
  return mean_se(values, [](const auto& v) { return static_cast<double>(v); });
}

}  // namespace erwlab
