// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace specrl {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Order-dependent hash of a list of integers; used to derive cell and
/// instance seeds from (seed, coordinates).
inline constexpr std::uint64_t hash_combine(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6A09E667F3BCC908ULL;
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

/// Philox4x32-10 counter-based generator.
///
/// The output is a pure function of (key, counter), so a stream can be
/// split into independent substreams by deriving new keys. Satisfies
/// UniformRandomBitGenerator with a 32-bit result type.
class Philox {
 public:
  using result_type = std::uint32_t;

  explicit constexpr Philox(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        counter_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    if (index_ == 4) {
      block_ = generate(counter_, key_);
      increment();
      index_ = 0;
    }
    return block_[index_++];
  }

  /// Independent generator keyed by (this key, id). Does not advance *this.
  [[nodiscard]] constexpr Philox substream(std::uint64_t id) const noexcept {
    const std::uint64_t key = static_cast<std::uint64_t>(key_[0]) | (static_cast<std::uint64_t>(key_[1]) << 32);
    const std::uint64_t stream = static_cast<std::uint64_t>(counter_[2]) | (static_cast<std::uint64_t>(counter_[3]) << 32);
    return Philox(hash_combine({key, stream, id}), 0);
  }

  /// Uniform double in [0, 1) with 53 bits of randomness.
  constexpr double uniform() noexcept {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

  void discard(std::uint64_t n) noexcept {
    while (n-- > 0) (*this)();
  }

  friend constexpr bool operator==(const Philox& a, const Philox& b) noexcept {
    return a.key_ == b.key_ && a.counter_ == b.counter_ && a.index_ == b.index_;
  }

 private:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

  static constexpr Block round(const Block& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }

  static constexpr Block generate(Block c, Key k) noexcept {
    for (int r = 0; r < 10; ++r) {
      c = round(c, k);
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    return c;
  }

  constexpr void increment() noexcept {
    if (++counter_[0] == 0) ++counter_[1];
  }

  Key key_;
  Block counter_;
  Block block_{};
  int index_ = 4;
};

}  // namespace specrl
