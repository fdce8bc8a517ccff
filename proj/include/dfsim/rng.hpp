#pragma once

#include <cstdint>
#include <random>

#include "dfsim/rational.hpp"

namespace dfsim {

/// splitmix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded generator whose draws are identical on every platform: the
/// mt19937_64 sequence is fixed by the standard, and bounded draws avoid the
/// implementation-defined std distributions.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix64(seed ^ mix64(stream))) {}

  /// Uniform in [0, n). n must be positive.
  std::uint64_t uniform(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  /// True with probability p, 0 <= p <= 1.
  bool chance(const Rational& p) {
    return static_cast<std::int64_t>(uniform(static_cast<std::uint64_t>(p.den()))) < p.num();
  }

 private:
  std::mt19937_64 engine_;
};

/// Stream tags so that each random facet of a scenario draws independently.
enum RngStream : std::uint64_t {
  kStreamInjections = 1,
  kStreamStalls = 2,
  kStreamAnnihilations = 3,
  kStreamTopology = 4,
  kStreamParameters = 5,
  kStreamFailures = 6,
};

}  // namespace dfsim
