#include "fasa/rng.hpp"

namespace fasa {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t base_seed, std::uint64_t stream_index) noexcept
    : base_seed_(base_seed), stream_index_(stream_index) {
  const std::uint64_t key = base_seed ^ splitmix64_mix(stream_index + kGoldenGamma);
  for (std::size_t i = 0; i < s_.size(); ++i) {
    s_[i] = splitmix64_mix(key + (i + 1) * kGoldenGamma);
  }
}

std::uint64_t RngStream::next_u64() noexcept {
  ++draws_;
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) noexcept {
  __extension__ typedef unsigned __int128 u128;
  u128 m = static_cast<u128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<u128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

RngStream split_stream(std::uint64_t base_seed, std::uint64_t index) noexcept {
  return RngStream(base_seed, index);
}

}  // namespace fasa
