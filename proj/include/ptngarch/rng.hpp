#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace ptngarch {

/// SplitMix64 finalizer: a bijective 64-bit avalanche mix.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive an independent stream key from a base seed and a list of stream
/// coordinates, e.g. derive_seed(base, {ladder_index, replication}).
/// The result depends only on the arguments, never on call order.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = mix64(base ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t c : coords) {
    h = mix64(h ^ mix64(c + 0x9e3779b97f4a7c15ULL));
  }
  return h;
}

/// Counter-based 64-bit generator. Output k is mix64(key + k * golden), so the
/// stream is a pure function of (seed, k): it can be skipped ahead, copied, or
/// re-created without replaying earlier draws.
///
/// Satisfies UniformRandomBitGenerator, but the model code only uses the
/// uniform()/below() helpers below so that results do not depend on the
/// standard library's distribution implementations.
class Counter64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Counter64(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) noexcept {
    if (n == 0) return 0;
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }
  constexpr void seek(std::uint64_t position) noexcept { counter_ = position; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ptngarch
