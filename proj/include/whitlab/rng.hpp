#pragma once

#include <complex>
#include <cstdint>
#include <string_view>

namespace whitlab {

// xoshiro256** seeded through splitmix64.  Hand-rolled instead of <random>
// so that streams are identical across platforms and standard libraries;
// reports must be reproducible byte-for-byte for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next() {
    auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::complex<double> box(double half_width) {
    return {uniform(-half_width, half_width), uniform(-half_width, half_width)};
  }

 private:
  std::uint64_t state_[4];
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Independent deterministic stream per (seed, tag) pair, so checks can run in
// any order (or in parallel) without perturbing each other's draws.
inline Rng seeded_stream(std::uint64_t seed, std::string_view tag) {
  return Rng(seed ^ fnv1a(tag));
}

}  // namespace whitlab
