#include <gtest/gtest.h>

#include <cmath>

#include "fasa/traffic.hpp"
#include "stat_helpers.hpp"

using fasa::RngStream;
using fasa::traffic::ArrivalModel;

namespace {

std::vector<double> poisson_probs(double mean, std::size_t cells) {
  std::vector<double> p(cells);
  double tail = 1.0;
  for (std::size_t k = 0; k + 1 < cells; ++k) {
    p[k] = fasa::testing::poisson_pmf(mean, k);
    tail -= p[k];
  }
  p.back() = std::max(tail, 0.0);
  return p;
}

}  // namespace

TEST(ArrivalModel, ValidatesDomain) {
  EXPECT_THROW(ArrivalModel::make(-0.1, 1.0), std::invalid_argument);
  EXPECT_THROW(ArrivalModel::make(1.1, 1.0), std::invalid_argument);
  EXPECT_THROW(ArrivalModel::make(0.5, -1.0), std::invalid_argument);
  EXPECT_NO_THROW(ArrivalModel::make(0.0, 0.0));
}

TEST(ArrivalModel, DerivedQuantities) {
  const auto m = ArrivalModel::make(0.001, 250.0);
  EXPECT_DOUBLE_EQ(m.lambda_bar(), 0.001 * 250.0);
  // sigma2 = theta (lambda + lambda^2) - (theta lambda)^2.
  const double direct = 0.001 * (250.0 + 250.0 * 250.0) - 0.25 * 0.25;
  EXPECT_NEAR(m.variance(), direct, 1e-12 * direct);
  const auto r = ArrivalModel::from_rate(0.35, 0.0001);
  EXPECT_NEAR(r.lambda, 3500.0, 1e-9);
  EXPECT_NEAR(r.lambda_bar(), 0.35, 1e-15);
}

TEST(SampleArrivals, ThetaZeroIsAlwaysZero) {
  RngStream rng(1, 0);
  const auto m = ArrivalModel::make(0.0, 50.0);
  for (int t = 0; t < 10000; ++t) {
    ASSERT_EQ(fasa::traffic::sample_arrivals(m, rng), 0u);
  }
  EXPECT_EQ(rng.draw_count(), 10000u);  // one gate draw per slot
}

TEST(SampleArrivals, MeanAndVarianceOfInterruptedPoisson) {
  RngStream rng(2, 0);
  const auto m = ArrivalModel::make(0.5, 4.0);
  constexpr int kDraws = 1000000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double a = static_cast<double>(fasa::traffic::sample_arrivals(m, rng));
    sum += a;
    sq += a * a;
  }
  const double mean = sum / kDraws;
  const double var = sq / kDraws - mean * mean;
  EXPECT_NEAR(mean, 2.0, 0.01);
  EXPECT_NEAR(var, 6.0, 0.05);
}

TEST(SampleArrivals, MeanWithinFourStandardErrors) {
  const std::pair<double, double> models[] = {{0.01, 35.0}, {1.0, 0.3}, {0.2, 12.0}, {0.001, 350.0}};
  int stream = 0;
  for (auto [theta, lambda] : models) {
    RngStream rng(3, stream++);
    const auto m = ArrivalModel::make(theta, lambda);
    constexpr int kDraws = 400000;
    double sum = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      sum += static_cast<double>(fasa::traffic::sample_arrivals(m, rng));
    }
    const double se = std::sqrt(m.variance() / kDraws);
    EXPECT_NEAR(sum / kDraws, m.lambda_bar(), 4.0 * se) << theta << " " << lambda;
  }
}

TEST(SampleArrivals, ThetaOneIsPoisson) {
  RngStream rng(4, 0);
  const auto m = ArrivalModel::make(1.0, 3.0);
  std::vector<std::uint64_t> counts(16);
  for (int i = 0; i < 200000; ++i) {
    ++counts[std::min<std::uint64_t>(fasa::traffic::sample_arrivals(m, rng), 15)];
  }
  EXPECT_GT(fasa::testing::chi_square_p(counts, poisson_probs(3.0, 16)), 1e-3);
}

class PoissonPmf : public ::testing::TestWithParam<double> {};

TEST_P(PoissonPmf, MatchesAnalyticPmf) {
  const double mean = GetParam();
  RngStream rng(5, static_cast<std::uint64_t>(mean * 1000));
  const auto cells = static_cast<std::size_t>(mean + 10.0 * std::sqrt(mean) + 12.0);
  std::vector<std::uint64_t> counts(cells);
  for (int i = 0; i < 1000000; ++i) {
    ++counts[std::min<std::uint64_t>(fasa::traffic::sample_poisson(mean, rng), cells - 1)];
  }
  EXPECT_GT(fasa::testing::chi_square_p(counts, poisson_probs(mean, cells)), 1e-3);
}

INSTANTIATE_TEST_SUITE_P(Means, PoissonPmf, ::testing::Values(0.5, 4.0, 9.5, 10.0, 17.3, 30.0),
                         [](const ::testing::TestParamInfo<double>& info) {
                           return "mean" + std::to_string(info.index);
                         });

TEST(Poisson, SmallMeanUsesOneDraw) {
  RngStream rng(6, 0);
  for (int i = 0; i < 1000; ++i) {
    fasa::traffic::sample_poisson(7.5, rng);
  }
  EXPECT_EQ(rng.draw_count(), 1000u);
}

TEST(Poisson, LargeMeanHasRightMoments) {
  RngStream rng(6, 1);
  constexpr int kDraws = 200000;
  const double mean = 3500.0;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double v = static_cast<double>(fasa::traffic::sample_poisson(mean, rng));
    sum += v;
    sq += v * v;
  }
  const double m = sum / kDraws;
  EXPECT_NEAR(m, mean, 4.0 * std::sqrt(mean / kDraws));
  EXPECT_NEAR(sq / kDraws - m * m, mean, 0.02 * mean);
}

struct BinomialCase {
  std::uint64_t n;
  double p;
};

class BinomialPmf : public ::testing::TestWithParam<BinomialCase> {};

TEST_P(BinomialPmf, MatchesAnalyticPmf) {
  const auto [n, p] = GetParam();
  RngStream rng(7, n);
  const double mean = static_cast<double>(n) * p;
  const double sd = std::sqrt(mean * (1.0 - p));
  const auto lo = static_cast<std::uint64_t>(std::max(0.0, std::floor(mean - 8.0 * sd - 1.0)));
  const auto hi = std::min<std::uint64_t>(n, static_cast<std::uint64_t>(mean + 8.0 * sd + 6.0));
  std::vector<std::uint64_t> counts(hi - lo + 1);
  std::vector<double> probs(counts.size());
  for (std::uint64_t k = lo; k <= hi; ++k) {
    probs[k - lo] = fasa::testing::binomial_pmf(n, p, k);
  }
  for (int i = 0; i < 500000; ++i) {
    const auto k = fasa::traffic::sample_binomial(n, p, rng);
    ASSERT_LE(k, n);
    ++counts[std::clamp(k, lo, hi) - lo];
  }
  EXPECT_GT(fasa::testing::chi_square_p(counts, probs), 1e-3) << n << " " << p;
}

INSTANTIATE_TEST_SUITE_P(Cases, BinomialPmf,
                         ::testing::Values(BinomialCase{2, 0.5}, BinomialCase{10, 0.3},
                                           BinomialCase{1000, 0.001}, BinomialCase{1000, 0.02},
                                           BinomialCase{1000, 0.7}, BinomialCase{100000, 0.5},
                                           BinomialCase{5000, 0.0002}),
                         [](const ::testing::TestParamInfo<BinomialCase>& info) {
                           return "case" + std::to_string(info.index);
                         });

TEST(Binomial, DegenerateCasesConsumeNoDraws) {
  RngStream rng(8, 0);
  EXPECT_EQ(fasa::traffic::sample_binomial(0, 0.5, rng), 0u);
  EXPECT_EQ(fasa::traffic::sample_binomial(10, 0.0, rng), 0u);
  EXPECT_EQ(fasa::traffic::sample_binomial(10, 1.0, rng), 10u);
  EXPECT_EQ(rng.draw_count(), 0u);
  fasa::traffic::sample_binomial(1000, 0.001, rng);
  EXPECT_EQ(rng.draw_count(), 1u);
}
