#pragma once

#include <cstdint>

namespace gtt {

/// Counter-based random stream.
///
/// A stream is identified by a 64-bit key; the i-th draw is
/// `mix64(key + (i + 1) * 0x9E3779B97F4A7C15)`, where `mix64` is the
/// SplitMix64 finalizer. Any draw can therefore be reached in O(1) via
/// `seek`, and two streams never share mutable state. Keys for render samples
/// are built with `stream_key(seed, x, y, sample)`.
///
/// This algorithm is part of the image reproducibility contract: changing it
/// changes every rendered image.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a,
                                            std::uint64_t b = 0,
                                            std::uint64_t c = 0) noexcept {
    std::uint64_t h = mix64(seed + kGolden);
    h = mix64(h ^ (a + 0x632BE59BD9B4E019ULL));
    h = mix64(h ^ (b + 0x8CB92BA72F3D8DD7ULL));
    h = mix64(h ^ (c + 0xD6E8FEB86659FD93ULL));
    return h;
  }

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Unbiased integer in [0, bound) by rejection. bound must be > 0.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t r = next_u64();
    while (r >= limit) r = next_u64();
    return r % bound;
  }

  constexpr void seek(std::uint64_t draws) noexcept { counter_ = draws; }
  constexpr std::uint64_t position() const noexcept { return counter_; }
  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace gtt
