#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace nlocal {

// SplitMix64: a tiny counter-style generator. Used to derive independent
// sub-seeds from (seed, index...) tuples so that parallel workers draw the
// same numbers regardless of scheduling.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = seed;
  for (std::uint64_t p : path) {
    SplitMix64 mix(s ^ (p * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
    s = mix();
  }
  return s;
}

// The named reproducible generator for parameter sampling.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  return Rng(derive_seed(seed, path));
}

}  // namespace nlocal
