#pragma once

#include <cstdint>

namespace topkfs {

// Deterministic pseudo-random generator used everywhere randomness is needed.
//
// Core stream: SplitMix64 (Steele, Lea, Flood 2014). Chosen over std::mt19937
// because every derived quantity here (uniform doubles, Gaussians, shuffles)
// is generated by code in this file, so a seed fully determines all synthetic
// data and initializations independent of the standard library's unspecified
// distribution algorithms.
//
// Gaussian draws use the Marsaglia polar method (log/sqrt only, no trig).
// fork(stream) derives an independent child generator so concurrent runs can
// each own a reproducible stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Next 64 random bits.
  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double uniform();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer in [0, n), n >= 1.
  std::uint64_t uniform_index(std::uint64_t n);

  // Standard normal via the polar method.
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Independent child stream; child(seed, s) != child(seed, s') for s != s'.
  Rng fork(std::uint64_t stream) const;

  // In-place Fisher-Yates shuffle of [first, first+n).
  template <typename T>
  void shuffle(T* first, std::size_t n) {
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      T tmp = first[i - 1];
      first[i - 1] = first[j];
      first[j] = tmp;
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace topkfs
