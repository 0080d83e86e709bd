#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace asgd {

// Stream ids used across the project so that independent random decisions
// never share a sequence. Worker-local communication streams start at
// kStreamWorkerBase + worker id.
inline constexpr std::uint64_t kStreamShuffle = 0;
inline constexpr std::uint64_t kStreamDraw = 1;
inline constexpr std::uint64_t kStreamInit = 2;
inline constexpr std::uint64_t kStreamSchedule = 3;
inline constexpr std::uint64_t kStreamWorkerBase = 0x100;

/// xoshiro256++ generator seeded through SplitMix64. A (seed, stream_id)
/// pair reproduces the same sequence on every platform; distinct stream ids
/// give statistically independent sequences. Instances are single-owner and
/// never shared between threads.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t x = seed;
    (void)splitmix64(x);  // decorrelate raw seed values
    x ^= (stream_id + 0x9E3779B97F4A7C15ull) * 0xD1342543DE82EF95ull;
    bool nonzero = false;
    for (auto& s : s_) {
      s = splitmix64(x);
      nonzero |= s != 0;
    }
    if (!nonzero) s_[0] = 0x9E3779B97F4A7C15ull;
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

  /// Uniform double in [0, 1) with 53 bits of randomness.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Unbiased uniform integer in [0, n). n must be >= 1.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via Box-Muller (no library distribution: those are
  /// implementation-defined and would break cross-platform reproducibility).
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline RandomStream seeded_rng(std::uint64_t seed, std::uint64_t stream_id) {
  return RandomStream(seed, stream_id);
}

/// In-place Fisher-Yates shuffle. std::shuffle consumes the generator in an
/// implementation-defined way, so we roll our own for reproducibility.
template <typename T>
void fisher_yates(std::span<T> v, RandomStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

/// `count` distinct values drawn uniformly from [0, n), returned sorted.
std::vector<std::uint32_t> pick_distinct(std::size_t n, std::size_t count, RandomStream& rng);

}  // namespace asgd
