//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_COMMON_RNG_H_
#define DRP_COMMON_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>

namespace drp {

// Seeded, splittable generator. Every stochastic component draws from an
// Rng (or a child obtained with Split()), so runs are bit-reproducible for a
// fixed seed. Distributions are implemented here rather than with <random>
// distribution objects, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Standard normal (Box-Muller, second value cached).
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t Index(std::size_t n);

  // Independent child stream; advances this generator by one draw.
  Rng Split();

  template <typename It>
  void Shuffle(It first, It last) {
    auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = Index(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer, used for seed derivation.
std::uint64_t Mix64(std::uint64_t x);

}  // namespace drp

#endif  // DRP_COMMON_RNG_H_
