#pragma once

#include <cstdint>
#include <random>

namespace mzi {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of substream `index` below `parent`. Work items seeded this way draw
/// the same numbers regardless of execution order or thread count.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

/// Random stream with a fully specified output sequence: std::mt19937_64 for
/// the bits and explicit conversions for the distributions (the standard
/// library distributions are implementation-defined).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  RandomStream substream(std::uint64_t index) const { return RandomStream(derive_seed(seed_, index)); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller (one value per call).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace mzi
