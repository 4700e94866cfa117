#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace molgen {

/// Deterministic random source. All distributions are implemented on top of
/// the raw mt19937_64 stream so that draws are bit-identical across standard
/// library implementations (std::normal_distribution and friends are not).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t raw() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Standard normal via Box-Muller (pairs cached).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Index drawn from an unnormalized nonnegative weight row.
  std::size_t multinomial(std::span<const float> weights);
  std::size_t multinomial(std::span<const double> weights);

  /// Fisher-Yates shuffle of an index vector.
  void shuffle(std::vector<std::size_t>& idx);

  /// Derived independent stream; stable in (seed, id).
  Rng fork(std::uint64_t id) const;

  std::uint64_t seed() const { return seed_; }

private:
  std::mt19937_64 engine_;
  std::uint64_t seed_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used for seed derivation and fingerprint hashing.
std::uint64_t mix64(std::uint64_t x);

}  // namespace molgen
