#pragma once

#include <cstdint>
#include <random>

namespace binar {

/// SplitMix64 finalizer. Used to derive well-separated seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed of stream `index` under `base_seed`. Replicate r of a Monte Carlo run
/// always draws from derive_seed(base_seed, r), whatever the worker layout.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

/**
 * Seedable, splittable uniform source.
 *
 * Wraps std::mt19937_64 and converts raw words to doubles itself, so the
 * produced stream is identical on every standard library implementation.
 * A stream is single-owner: do not share one across threads.
 */
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  /// Uniform draw on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Independent child stream; does not advance this stream.
  RandomStream split(std::uint64_t index) const;

  std::uint64_t next_word() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace binar
