#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace spce {

// Deterministic random stream: xoshiro256++ seeded through a splitmix64
// chain from a 128-bit (seed, stream) key. Two properties the simulation
// relies on:
//   - the draw sequence is a pure function of (seed, stream), so the same
//     configuration replays bit-identically on any machine and any worker
//     count;
//   - child(i) derives a statistically independent stream keyed by
//     (seed, mix(stream, i)); handing child(i) to the worker that owns
//     item i makes parallel generation order-independent.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    std::uint64_t x = mix(seed + 0x9E3779B97F4A7C15ULL) ^ mix(stream);
    for (auto& w : state_) {
      x += 0x9E3779B97F4A7C15ULL;
      w = mix(x);
    }
  }

  // Independent stream for a sub-task; derivation uses only the construction
  // key, never the current state, so call order does not matter.
  RandomStream child(std::uint64_t index) const {
    return RandomStream(seed_, mix(stream_ + 0x9E3779B97F4A7C15ULL * (index + 1)));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n); multiply-shift, deterministic.
  std::uint64_t uniform_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  // splitmix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t state_[4];
};

// Stable 64-bit string hash (FNV-1a); used to key per-run streams by run id
// so adding a run to a campaign never perturbs existing runs.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace spce
