#pragma once

#include <cmath>
#include <cstdint>

// Self-contained xoshiro256++ generator. The standard <random> engines are
// deterministic but their distributions are implementation-defined; traces
// must reproduce bit-for-bit from a seed, so the uniform/exponential
// transforms are spelled out here.

namespace loracell {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = detail::splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Exponential with the given mean; uniform() < 1 keeps the log finite.
  double exponential(double mean) { return -std::log(1.0 - uniform()) * mean; }

  /// Integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  /// Derive an independent stream; used to give every replication its own RNG.
  Rng stream(std::uint64_t stream_id) const {
    std::uint64_t sm = s_[0] ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
    return Rng(detail::splitmix64(sm));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

}  // namespace loracell
