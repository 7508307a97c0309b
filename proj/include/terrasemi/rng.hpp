#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

#include "terrasemi/digest.hpp"
#include "terrasemi/error.hpp"

namespace terrasemi {

/// SplitMix64 finalizer; used to derive independent seeds from (seed, salt).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::uint64_t salt) noexcept {
  return splitmix64(seed ^ splitmix64(salt));
}

/**
 * Deterministic random source: PCG32 (XSH-RR, 64-bit state, 32-bit output)
 * as published by M. O'Neill, with the standard seeding procedure.
 *
 * Every derived quantity (uniform doubles, bounded integers, shuffles) is
 * computed here from raw 32-bit outputs with fixed arithmetic, so a given
 * (seed, stream) pair yields the same values on every platform and compiler.
 * `<random>` distributions are deliberately not used: their algorithms are
 * implementation-defined.
 */
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) noexcept
      : seed_(seed), stream_(stream), inc_((stream << 1u) | 1u) {
    next_u32();
    state_ += seed;
    next_u32();
  }

  /// Stream keyed by a sample id so results do not depend on processing order.
  static Rng for_key(std::uint64_t seed, std::string_view key) noexcept {
    return Rng(seed, fnv1a64(key));
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint32_t next_u32() noexcept {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    return (hi << 32u) | next_u32();
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept {
    const std::uint32_t a = next_u32() >> 5u;
    const std::uint32_t b = next_u32() >> 6u;
    return (a * 67108864.0 + b) * (1.0 / 9007199254740992.0);
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer in [0, n). Unbiased (rejection on the 32-bit range).
  std::uint32_t uniform_int(std::uint32_t n) {
    if (n == 0) throw Error(ErrorKind::kInvalidArgument, "uniform_int: n == 0");
    const std::uint32_t threshold = (0u - n) % n;
    for (;;) {
      const std::uint32_t r = next_u32();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw Error(ErrorKind::kInvalidArgument, "uniform_int: empty range");
    return lo + uniform_int(static_cast<std::uint32_t>(hi - lo + 1));
  }

  /// True with probability p. Always consumes exactly one draw.
  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Fisher-Yates, back to front.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_int(static_cast<std::uint32_t>(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t state_ = 0;
  std::uint64_t inc_;
};

}  // namespace terrasemi
