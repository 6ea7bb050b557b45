#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mobilink {

// All randomness in the library flows through Rng. The engine is
// std::mt19937_64 (bit-identical output on every conforming platform) and the
// derived draws below are defined purely in terms of its 64-bit output, so a
// fixed seed reproduces the same stream everywhere.
//
// Consumption contract (documented because reproducibility depends on it):
//   next()     one engine draw
//   unit()     one engine draw, mapped to [0,1) as (x >> 11) * 2^-53
//   below(n)   one engine draw, plus further draws on rejection
//             (rejection probability < 2^-32 for any n that fits in memory)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Unbiased via multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    while (true) {
      std::uint64_t x = next();
      __uint128_t m = static_cast<__uint128_t>(x) * n;
      auto lo = static_cast<std::uint64_t>(m);
      if (lo >= n || lo >= static_cast<std::uint64_t>(-n) % n)
        return static_cast<std::uint64_t>(m >> 64);
    }
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Derives the seed of an independent substream from a master seed, a stream
// label, and up to two integer keys. Label-keyed derivation makes parallel
// stages order-independent: the stream for (seed, "walk", user, trace) is the
// same no matter which worker runs it.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t k1 = 0, std::uint64_t k2 = 0) {
  std::uint64_t h = detail::splitmix64(master ^ detail::fnv1a64(label));
  h = detail::splitmix64(h ^ k1);
  h = detail::splitmix64(h ^ k2);
  return h;
}

inline Rng substream(std::uint64_t master, std::string_view label,
                     std::uint64_t k1 = 0, std::uint64_t k2 = 0) {
  return Rng(derive_seed(master, label, k1, k2));
}

inline Rng substream(std::uint64_t master, std::string_view label,
                     std::string_view key, std::uint64_t k2 = 0) {
  return Rng(derive_seed(master, label, detail::fnv1a64(key), k2));
}

}  // namespace mobilink
