#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fasa/simulator.hpp"

namespace fasa::metrics {

enum class MetricTag {
  RisingTime,
  StationaryThroughput,
  DelayPercentile,
  MeanDelay,
  Divergence,
};

std::string_view to_string(MetricTag tag) noexcept;

struct MetricSummary {
  std::optional<double> value;  ///< absent when the metric is undefined
  double ci95_halfwidth = 0.0;
  std::uint64_t trials = 0;
  MetricTag tag = MetricTag::MeanDelay;
};

/// Mean and normal-approximation 95% half-width (1.96 s / sqrt(m)) of the
/// present entries. Absent entries are skipped; `trials` counts the present
/// ones. No present entry gives an absent value.
MetricSummary summarize(std::span<const std::optional<double>> per_trial, MetricTag tag);
MetricSummary summarize(std::span<const double> per_trial, MetricTag tag);

/// Ratio N_hat / n at which the expected throughput of a step response
/// reaches x% of 1/e: 1/rho for the root rho > 1 of rho e^-rho = (x/100) / e.
double rising_threshold_ratio(double x_percent);

/// Slots elapsed until the trace first reaches (x/100) / e, counting the
/// crossing slot: index of the first entry >= threshold, plus one. Absent if
/// never reached. 0 < x < 100.
std::optional<std::uint64_t> rising_time(std::span<const double> throughput_trace,
                                         double x_percent);

/// Mean of the trace from the 90% crossing slot (inclusive) to the end.
std::optional<double> stationary_throughput(std::span<const double> throughput_trace);

/// Nearest-rank percentile: the ceil(y/100 * m)-th smallest delay of m
/// samples (rank clamped to [1, m]). Absent for an empty sample set.
std::optional<std::uint64_t> delay_percentile(std::span<const sim::DelaySample> samples,
                                              double y_percent);

/// Same rule over a population of `population` >= samples.size() devices of
/// which only `samples` were served (the rest have unknown, larger delays).
/// Absent when the rank falls among the unserved devices.
std::optional<std::uint64_t> delay_percentile(std::span<const sim::DelaySample> samples,
                                              double y_percent, std::uint64_t population);

/// (d - d_star) / d_star; throws std::invalid_argument when d_star <= 0.
double divergence(double d, double d_star);

/// Divergence of two summaries with a first-order (delta-method) CI.
MetricSummary divergence(const MetricSummary& d, const MetricSummary& d_star);

/// Divergence of paired per-trial mean delays, mean(d) / mean(d_star) - 1.
/// Pairs with an absent side are dropped. The CI is the delta-method
/// half-width of the ratio of means, which keeps the shared arrival noise of
/// paired trials out of the interval.
MetricSummary paired_divergence(std::span<const std::optional<double>> d,
                                std::span<const std::optional<double>> d_star);

/// Elementwise mean of equally long per-trial series.
std::vector<double> mean_series(std::span<const std::vector<double>> series);

}  // namespace fasa::metrics
