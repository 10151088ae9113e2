#include <gtest/gtest.h>

#include <array>
#include <set>

#include "fasa/rng.hpp"
#include "stat_helpers.hpp"

namespace {

// Independent transcription of SplitMix64 and xoshiro256** from their
// published reference code.
struct ReferenceSplitMix {
  std::uint64_t x;
  std::uint64_t next() {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

std::uint64_t reference_mix(std::uint64_t z) {
  ReferenceSplitMix s{z - 0x9E3779B97F4A7C15ULL};
  return s.next();
}

struct ReferenceXoshiro {
  std::array<std::uint64_t, 4> s;
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t next() {
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
};

ReferenceXoshiro reference_stream(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t key = seed ^ reference_mix(index + 0x9E3779B97F4A7C15ULL);
  ReferenceSplitMix sm{key};
  return ReferenceXoshiro{{sm.next(), sm.next(), sm.next(), sm.next()}};
}

}  // namespace

TEST(Rng, MatchesReferenceDerivationAndGenerator) {
  for (std::uint64_t seed : {0ULL, 7ULL, 0xDEADBEEFULL}) {
    for (std::uint64_t index : {0ULL, 1ULL, 999ULL}) {
      auto ours = fasa::split_stream(seed, index);
      auto ref = reference_stream(seed, index);
      for (int i = 0; i < 100; ++i) {
        ASSERT_EQ(ours.next_u64(), ref.next());
      }
    }
  }
}

TEST(Rng, SameSeedAndIndexReproduce) {
  auto a = fasa::split_stream(42, 3);
  auto b = fasa::split_stream(42, 3);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.next_u64(), b.next_u64());
  }
  EXPECT_EQ(a.draw_count(), 1000u);
}

TEST(Rng, DistinctIndicesGiveDistinctStreams) {
  std::set<std::uint64_t> first;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    first.insert(fasa::split_stream(7, i).next_u64());
  }
  EXPECT_EQ(first.size(), 10000u);
}

TEST(Rng, NeighbouringStreamsAreJointlyUniform) {
  auto a = fasa::split_stream(7, 0);
  auto b = fasa::split_stream(7, 1);
  constexpr int kBins = 10;
  std::vector<std::uint64_t> ua(kBins), ub(kBins), joint(kBins * kBins);
  for (int i = 0; i < 10000; ++i) {
    const auto x = static_cast<int>(a.uniform() * kBins);
    const auto y = static_cast<int>(b.uniform() * kBins);
    ++ua[x];
    ++ub[y];
    ++joint[x * kBins + y];
  }
  EXPECT_GT(fasa::testing::chi_square_p(ua, std::vector<double>(kBins, 0.1)), 1e-3);
  EXPECT_GT(fasa::testing::chi_square_p(ub, std::vector<double>(kBins, 0.1)), 1e-3);
  EXPECT_GT(fasa::testing::chi_square_p(joint, std::vector<double>(kBins * kBins, 0.01)), 1e-3);
}

TEST(Rng, UniformStaysInUnitInterval) {
  auto r = fasa::split_stream(1, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, UniformBelowIsUniform) {
  auto r = fasa::split_stream(3, 0);
  EXPECT_EQ(r.uniform_below(1), 0u);
  std::vector<std::uint64_t> counts(7);
  for (int i = 0; i < 700000; ++i) {
    const auto v = r.uniform_below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  EXPECT_GT(fasa::testing::chi_square_p(counts, std::vector<double>(7, 1.0 / 7.0)), 1e-3);
}

TEST(Rng, DeriveSeedSeparatesSalts) {
  EXPECT_NE(fasa::derive_seed(7, 1), fasa::derive_seed(7, 2));
  EXPECT_NE(fasa::derive_seed(7, 1), fasa::derive_seed(8, 1));
  static_assert(fasa::derive_seed(7, 1) == fasa::derive_seed(7, 1));
}
