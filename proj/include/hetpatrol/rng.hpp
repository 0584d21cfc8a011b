#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace hetpatrol {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (mix64(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

constexpr std::uint64_t hash_string(std::uint64_t h, std::string_view s) {
  // FNV-1a over the bytes, folded into h.
  std::uint64_t f = 0xcbf29ce484222325ULL;
  for (char c : s) {
    f ^= static_cast<unsigned char>(c);
    f *= 0x100000001b3ULL;
  }
  return hash_combine(h, f);
}

/// Counter-based generator: draw i is mix64(key + i * gamma). Every stochastic
/// choice in a trial consumes this stream in a fixed order, so a (key, counter)
/// pair pins the whole future of the stream.
///
/// Distributions are implemented here rather than with <random> because the
/// standard distributions are implementation-defined and results must match
/// across standard libraries.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be > 0. Rejection keeps it unbiased.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r = next_u64();
    while (r >= limit) r = next_u64();
    return r % n;
  }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace hetpatrol
