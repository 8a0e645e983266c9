#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "tfs/types.hpp"

namespace tfs {

/// Named substreams derived from one master seed. Every consumer of
/// randomness owns its own stream, so replications, the reference run and
/// oracle batches never share state and results do not depend on execution
/// order or thread count.
enum class StreamTag : std::uint64_t {
  placement = 1,    // user positions, shared by all replications of a setting
  replication = 2,  // per-replication fading / sampling
  reference = 3,    // long-run reference
  oracle = 4,       // quantile fixed-point batches
  evaluation = 5,   // frozen-threshold utility evaluation
  epoch = 6,        // epoch-scheduler runs
  misc = 7,
};

/// Deterministic RNG wrapper around mt19937_64 with explicit floating-point
/// transforms. std::*_distribution is avoided on purpose: its output is
/// implementation-defined, while these transforms are pinned by the code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Derives an independent stream from (master, tag, a, b) by chained
  /// splitmix64 mixing.
  static Rng substream(std::uint64_t master, StreamTag tag, std::uint64_t a = 0,
                       std::uint64_t b = 0) {
    std::uint64_t s = mix(master);
    s = mix(s ^ mix(static_cast<std::uint64_t>(tag) + 0x632be59bd9b4e019ULL));
    s = mix(s ^ mix(a + 0x9e3779b97f4a7c15ULL));
    s = mix(s ^ mix(b + 0xd1b54a32d192ed03ULL));
    return Rng(s);
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1) with 53 random mantissa bits.
  Real uniform() { return static_cast<Real>(gen_() >> 11) * 0x1.0p-53; }

  Real uniform_in(Real a, Real b) { return a + (b - a) * uniform(); }

  /// Exp(1); -log1p(-u) is exact for u near 0 and finite for all u < 1.
  Real exponential() { return -std::log1p(-uniform()); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace tfs
