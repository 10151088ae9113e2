#pragma once

#include <cstdint>

#include "fasa/rng.hpp"

namespace fasa::traffic {

/// Interrupted Poisson arrivals: in each slot an event occurs with
/// probability `theta` (at most one per slot) and triggers Poisson(`lambda`)
/// devices. theta = 1 is the plain Poisson process.
struct ArrivalModel {
  double theta = 0.0;
  double lambda = 0.0;

  /// Validates 0 <= theta <= 1 and lambda >= 0; throws std::invalid_argument.
  static ArrivalModel make(double theta, double lambda);
  /// Model with long-term rate `lambda_bar` at event probability `theta`.
  static ArrivalModel from_rate(double lambda_bar, double theta);
  static ArrivalModel none() { return {}; }

  double lambda_bar() const noexcept { return theta * lambda; }
  double variance() const noexcept {
    const double lb = lambda_bar();
    return lb * (1.0 + lambda - lb);
  }
};

/// Poisson(mean) variate.
///
/// mean < 10: inversion by sequential search from k = 0; exactly one draw.
/// mean >= 10: PTRS transformed rejection (Hormann 1993); two draws per
/// rejection round, about 1.15 rounds on average.
std::uint64_t sample_poisson(double mean, RngStream& rng);

/// Binomial(n, p) variate drawn as a single variate (never n Bernoulli trials).
///
/// Works on p' = min(p, 1 - p) and reflects the result when p > 1/2.
/// n p' < 10: inversion by sequential search; exactly one draw.
/// n p' >= 10: BTRS transformed rejection (Hormann 1993); two draws per round.
/// p <= 0 or p >= 1 or n == 0 consume no draws.
std::uint64_t sample_binomial(std::uint64_t n, double p, RngStream& rng);

/// A_t for one slot. Draw contract: always one draw for the event gate
/// (uniform < theta means ON); when ON and lambda > 0, followed by the draws
/// of sample_poisson(lambda).
std::uint64_t sample_arrivals(const ArrivalModel& model, RngStream& rng);

}  // namespace fasa::traffic
