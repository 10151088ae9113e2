#pragma once

#include <array>
#include <cstdint>

namespace fasa {

/// Finalizer of SplitMix64 (Steele, Lea, Flood 2014). Bijective on 64-bit words.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// A single-owner xoshiro256** generator bound to a (base_seed, stream_index)
/// pair.
///
/// Stream derivation (stable across platforms and builds):
///
///     key   = base_seed XOR splitmix64_mix(stream_index + kGoldenGamma)
///     s[i]  = splitmix64_mix(key + (i + 1) * kGoldenGamma),  i = 0..3
///
/// i.e. the four state words are the first four outputs of a SplitMix64
/// sequence started at `key`. Because splitmix64_mix is a bijection, distinct
/// stream indices under one base seed always produce distinct keys.
///
/// Every draw advances `draw_count()` by one; samplers document how many
/// draws they consume so trial traces stay reproducible.
class RngStream {
 public:
  RngStream(std::uint64_t base_seed, std::uint64_t stream_index) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 bits of resolution. One draw.
  double uniform() noexcept;

  /// Uniform integer on [0, bound), bound > 0. Lemire's multiply-shift with
  /// rejection; one draw in all but a ~bound/2^64 fraction of calls.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept;

  std::uint64_t base_seed() const noexcept { return base_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }
  std::uint64_t draw_count() const noexcept { return draws_; }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t base_seed_ = 0;
  std::uint64_t stream_index_ = 0;
  std::uint64_t draws_ = 0;
};

RngStream split_stream(std::uint64_t base_seed, std::uint64_t index) noexcept;

/// Derives an unrelated 64-bit seed from a seed and a salt. Used for seed
/// families that must not overlap with the per-trial streams of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  return splitmix64_mix(seed ^ splitmix64_mix(salt ^ 0xD1B54A32D192ED03ULL));
}

}  // namespace fasa
