#include "fasa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fasa/analysis.hpp"

namespace fasa::metrics {

std::string_view to_string(MetricTag tag) noexcept {
  switch (tag) {
    case MetricTag::RisingTime:
      return "rising_time";
    case MetricTag::StationaryThroughput:
      return "stationary_throughput";
    case MetricTag::DelayPercentile:
      return "delay_percentile";
    case MetricTag::MeanDelay:
      return "mean_delay";
    case MetricTag::Divergence:
      return "divergence";
  }
  return "unknown";
}

MetricSummary summarize(std::span<const std::optional<double>> per_trial, MetricTag tag) {
  MetricSummary s;
  s.tag = tag;
  double sum = 0.0;
  for (const auto& v : per_trial) {
    if (v) {
      sum += *v;
      ++s.trials;
    }
  }
  if (s.trials == 0) {
    return s;
  }
  const double m = static_cast<double>(s.trials);
  const double mean = sum / m;
  double ss = 0.0;
  for (const auto& v : per_trial) {
    if (v) {
      ss += (*v - mean) * (*v - mean);
    }
  }
  s.value = mean;
  s.ci95_halfwidth = s.trials > 1 ? 1.96 * std::sqrt(ss / (m - 1.0) / m) : 0.0;
  return s;
}

MetricSummary summarize(std::span<const double> per_trial, MetricTag tag) {
  std::vector<std::optional<double>> wrapped(per_trial.begin(), per_trial.end());
  return summarize(wrapped, tag);
}

double rising_threshold_ratio(double x_percent) {
  if (!(x_percent > 0.0 && x_percent < 100.0)) {
    throw std::invalid_argument("rising_threshold_ratio: x must lie in (0, 100)");
  }
  const double target = x_percent / 100.0 * analysis::kInvE;
  // rho e^-rho decreases on (1, inf); bisect for the larger root.
  double lo = 1.0;
  double hi = 2.0;
  while (hi * std::exp(-hi) > target) {
    hi *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::exp(-mid) > target ? lo : hi) = mid;
  }
  return 1.0 / (0.5 * (lo + hi));
}

namespace {

std::optional<std::size_t> first_crossing(std::span<const double> trace, double x_percent) {
  const double threshold = x_percent / 100.0 * analysis::kInvE;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    if (trace[t] >= threshold) {
      return t;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::uint64_t> rising_time(std::span<const double> throughput_trace,
                                         double x_percent) {
  if (!(x_percent > 0.0 && x_percent < 100.0)) {
    throw std::invalid_argument("rising_time: x must lie in (0, 100)");
  }
  const auto t = first_crossing(throughput_trace, x_percent);
  if (!t) {
    return std::nullopt;
  }
  return *t + 1;
}

std::optional<double> stationary_throughput(std::span<const double> throughput_trace) {
  const auto start = first_crossing(throughput_trace, 90.0);
  if (!start) {
    return std::nullopt;
  }
  const auto tail = throughput_trace.subspan(*start);
  double sum = 0.0;
  for (double v : tail) {
    sum += v;
  }
  return sum / static_cast<double>(tail.size());
}

std::optional<std::uint64_t> delay_percentile(std::span<const sim::DelaySample> samples,
                                              double y_percent) {
  return delay_percentile(samples, y_percent, samples.size());
}

std::optional<std::uint64_t> delay_percentile(std::span<const sim::DelaySample> samples,
                                              double y_percent, std::uint64_t population) {
  if (!(y_percent > 0.0 && y_percent <= 100.0)) {
    throw std::invalid_argument("delay_percentile: y must lie in (0, 100]");
  }
  if (population < samples.size()) {
    throw std::invalid_argument("delay_percentile: population smaller than sample set");
  }
  if (population == 0) {
    return std::nullopt;
  }
  const double m = static_cast<double>(population);
  // Guard ceil against representation error, e.g. 0.1 * 1000 = 100.00000000000001.
  auto rank = static_cast<std::size_t>(std::ceil(y_percent / 100.0 * m - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, static_cast<std::size_t>(population));
  if (rank > samples.size()) {
    return std::nullopt;
  }
  std::vector<std::uint64_t> delays;
  delays.reserve(samples.size());
  for (const auto& s : samples) {
    delays.push_back(s.delay());
  }
  std::nth_element(delays.begin(), delays.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   delays.end());
  return delays[rank - 1];
}

double divergence(double d, double d_star) {
  if (!(d_star > 0.0)) {
    throw std::invalid_argument("divergence: reference delay must be > 0");
  }
  return (d - d_star) / d_star;
}

MetricSummary divergence(const MetricSummary& d, const MetricSummary& d_star) {
  MetricSummary s;
  s.tag = MetricTag::Divergence;
  s.trials = std::min(d.trials, d_star.trials);
  if (!d.value || !d_star.value || !(*d_star.value > 0.0)) {
    return s;
  }
  const double ds = *d_star.value;
  s.value = divergence(*d.value, ds);
  const double a = d.ci95_halfwidth / ds;
  const double b = *d.value * d_star.ci95_halfwidth / (ds * ds);
  s.ci95_halfwidth = std::sqrt(a * a + b * b);
  return s;
}

MetricSummary paired_divergence(std::span<const std::optional<double>> d,
                                std::span<const std::optional<double>> d_star) {
  if (d.size() != d_star.size()) {
    throw std::invalid_argument("paired_divergence: sample sets differ in length");
  }
  MetricSummary s;
  s.tag = MetricTag::Divergence;
  double sum_d = 0.0;
  double sum_ref = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] && d_star[i]) {
      sum_d += *d[i];
      sum_ref += *d_star[i];
      ++s.trials;
    }
  }
  if (s.trials == 0 || !(sum_ref > 0.0)) {
    return s;
  }
  const double m = static_cast<double>(s.trials);
  const double ratio = sum_d / sum_ref;
  s.value = ratio - 1.0;
  if (s.trials > 1) {
    double ss = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i] && d_star[i]) {
        const double z = *d[i] - ratio * *d_star[i];
        ss += z * z;
      }
    }
    const double mean_ref = sum_ref / m;
    s.ci95_halfwidth = 1.96 * std::sqrt(ss / (m - 1.0) / m) / mean_ref;
  }
  return s;
}

std::vector<double> mean_series(std::span<const std::vector<double>> series) {
  if (series.empty()) {
    return {};
  }
  std::vector<double> out(series.front().size(), 0.0);
  for (const auto& s : series) {
    if (s.size() != out.size()) {
      throw std::invalid_argument("mean_series: series lengths differ");
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      out[i] += s[i];
    }
  }
  for (double& v : out) {
    v /= static_cast<double>(series.size());
  }
  return out;
}

}  // namespace fasa::metrics
