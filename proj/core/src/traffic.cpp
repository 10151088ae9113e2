#include "fasa/traffic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fasa::traffic {

ArrivalModel ArrivalModel::make(double theta, double lambda) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("theta must lie in [0, 1], got " + std::to_string(theta));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be finite and >= 0, got " + std::to_string(lambda));
  }
  return ArrivalModel{theta, lambda};
}

ArrivalModel ArrivalModel::from_rate(double lambda_bar, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("theta must lie in (0, 1] to carry a positive rate");
  }
  if (!(lambda_bar >= 0.0)) {
    throw std::invalid_argument("lambda_bar must be >= 0");
  }
  return make(theta, lambda_bar / theta);
}

namespace {

std::uint64_t poisson_inversion(double mean, RngStream& rng) {
  const double u = rng.uniform();
  double pmf = std::exp(-mean);
  double cdf = pmf;
  std::uint64_t k = 0;
  // The tail mass beyond k = 200 is far below 2^-53 for mean < 10.
  while (u >= cdf && k < 200) {
    ++k;
    pmf *= mean / static_cast<double>(k);
    cdf += pmf;
  }
  return k;
}

std::uint64_t poisson_ptrs(double mean, RngStream& rng) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) {
      return static_cast<std::uint64_t>(k);
    }
    if (k < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

std::uint64_t binomial_inversion(std::uint64_t n, double p, RngStream& rng) {
  const double q = 1.0 - p;
  const double s = p / q;
  const double a = static_cast<double>(n + 1) * s;
  double r = std::exp(static_cast<double>(n) * std::log1p(-p));
  double u = rng.uniform();
  std::uint64_t x = 0;
  while (u >= r && x < n) {
    u -= r;
    ++x;
    r *= a / static_cast<double>(x) - s;
    if (r <= 0.0) {
      break;
    }
  }
  return x;
}

std::uint64_t binomial_btrs(std::uint64_t n, double p, RngStream& rng) {
  const double nd = static_cast<double>(n);
  const double q = 1.0 - p;
  const double spq = std::sqrt(nd * p * q);
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nd * p + 0.5;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double vr = 0.92 - 4.2 / b;
  const double m = std::floor((nd + 1.0) * p);
  const double lpq = std::log(p / q);
  const double h = std::lgamma(m + 1.0) + std::lgamma(nd - m + 1.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + c);
    if (k < 0.0 || k > nd) {
      continue;
    }
    if (us >= 0.07 && v <= vr) {
      return static_cast<std::uint64_t>(k);
    }
    v = std::log(v * alpha / (a / (us * us) + b));
    if (v <= h - std::lgamma(k + 1.0) - std::lgamma(nd - k + 1.0) + (k - m) * lpq) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

std::uint64_t sample_poisson(double mean, RngStream& rng) {
  if (mean <= 0.0) {
    return 0;
  }
  return mean < 10.0 ? poisson_inversion(mean, rng) : poisson_ptrs(mean, rng);
}

std::uint64_t sample_binomial(std::uint64_t n, double p, RngStream& rng) {
  if (n == 0 || p <= 0.0) {
    return 0;
  }
  if (p >= 1.0) {
    return n;
  }
  const bool flipped = p > 0.5;
  const double pp = flipped ? 1.0 - p : p;
  const std::uint64_t x = static_cast<double>(n) * pp < 10.0 ? binomial_inversion(n, pp, rng)
                                                             : binomial_btrs(n, pp, rng);
  return flipped ? n - x : x;
}

std::uint64_t sample_arrivals(const ArrivalModel& model, RngStream& rng) {
  const bool on = rng.uniform() < model.theta;
  if (!on || model.lambda <= 0.0) {
    return 0;
  }
  return sample_poisson(model.lambda, rng);
}

}  // namespace fasa::traffic
