#pragma once

// Deterministic, bit-portable random streams. xoshiro256** core seeded via
// SplitMix64; named sub-streams are derived from a master seed plus integer
// tags so that parallel and serial runs consume identical sequences.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace fleetmix {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t v, int k) {
  return (v << k) | (v >> (64 - k));
}

}  // namespace detail

// Stable tag mixer: fold tags into a seed one at a time. The tag is pushed
// through the (bijective) SplitMix64 finalizer before entering the seed, so
// for a fixed seed every tag maps to a distinct derived seed and vice versa.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t t = tag;
  std::uint64_t x = seed ^ detail::splitmix64(t);
  return detail::splitmix64(x);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : state_) w = detail::splitmix64(x);
  }

  // Named sub-stream: seed + ordered tags, e.g. stream(seed, {kScenario, i}).
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = seed;
    for (std::uint64_t t : tags) h = mix_seed(h, t);
    return Rng(h);
  }

  std::uint64_t next_u64() {
    std::uint64_t result = detail::rotl64(state_[1] * 5, 7) * 9;
    std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n), rejection on the modulo tail.
  std::uint64_t bounded(std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t threshold = (0 - n) % n;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r < threshold);
    return r % n;
  }

  // Inclusive integer range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(bounded(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Standard normal via Box-Muller (portable; std::normal_distribution is not).
  double normal() {
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

  // Index drawn proportionally to non-negative weights (at least one > 0).
  std::size_t weighted_index(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double x = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (x < acc) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

 private:
  std::array<std::uint64_t, 4> state_{};
};

// Well-known stream tags so call sites stay greppable and collision-free.
namespace stream_tag {
inline constexpr std::uint64_t kScenario = 1;
inline constexpr std::uint64_t kSolver = 2;
inline constexpr std::uint64_t kInitial = 3;
inline constexpr std::uint64_t kSelection = 4;
inline constexpr std::uint64_t kDestroy = 5;
inline constexpr std::uint64_t kRepair = 6;
inline constexpr std::uint64_t kAcceptance = 7;
inline constexpr std::uint64_t kGenerator = 8;
inline constexpr std::uint64_t kMix = 9;
inline constexpr std::uint64_t kRetry = 10;
}  // namespace stream_tag

}  // namespace fleetmix
