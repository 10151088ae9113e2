#include "fasa/simulator.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "fasa/csv.hpp"

namespace fasa::sim {

void Backlog::add(std::uint64_t arrival_slot, std::uint64_t count) {
  arrival_slots_.insert(arrival_slots_.end(), count, arrival_slot);
}

std::uint64_t Backlog::remove_uniform(RngStream& rng) {
  assert(!arrival_slots_.empty());
  const auto idx = static_cast<std::size_t>(rng.uniform_below(arrival_slots_.size()));
  const std::uint64_t slot = arrival_slots_[idx];
  arrival_slots_[idx] = arrival_slots_.back();
  arrival_slots_.pop_back();
  return slot;
}

RngStream arrival_stream(std::uint64_t seed, std::uint64_t trial_index) noexcept {
  return split_stream(derive_seed(seed, kArrivalStreamSalt), trial_index);
}

ContentionResult contend(std::uint64_t n, double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("contend: p must lie in [0, 1]");
  }
  ContentionResult r;
  r.transmitters = traffic::sample_binomial(n, p, rng);
  r.z = r.transmitters == 0   ? SlotOutcome::Idle
        : r.transmitters == 1 ? SlotOutcome::Success
                              : SlotOutcome::Collision;
  return r;
}

double expected_throughput(std::uint64_t n, double p) noexcept {
  if (n == 0 || p <= 0.0) {
    return 0.0;
  }
  if (p >= 1.0) {
    return n == 1 ? 1.0 : 0.0;
  }
  const double nd = static_cast<double>(n);
  return nd * p * std::exp((nd - 1.0) * std::log1p(-p));
}

namespace {

struct SlotStep {
  SlotRecord record;
  std::optional<DelaySample> served;
};

SlotStep advance(estimators::EstimatorState& est, Backlog& backlog, RngStream& rng,
                 std::uint64_t t, std::uint64_t arrivals) {
  backlog.add(t, arrivals);
  SlotStep out;
  auto& rec = out.record;
  rec.t = t;
  rec.arrivals = arrivals;
  rec.n = backlog.size();
  rec.n_hat = est.n_hat;
  rec.streak = est.streak;
  rec.p = estimators::tx_probability(est, rec.n);
  rec.expected_throughput = expected_throughput(rec.n, rec.p);

  const auto c = contend(rec.n, rec.p, rng);
  rec.z = c.z;
  assert(c.z != SlotOutcome::Success || rec.n >= 1);
  if (c.z == SlotOutcome::Success) {
    out.served = DelaySample{backlog.remove_uniform(rng), t};
  }
  est = estimators::observe(std::move(est), c.z);
  return out;
}

}  // namespace

ClosedLoopResult run_closed_loop(const traffic::ArrivalModel& model, const SchemeParams& scheme,
                                 std::uint64_t horizon, std::uint64_t seed,
                                 std::uint64_t trial_index, ClosedLoopOptions options) {
  if (horizon < 1) {
    throw std::invalid_argument("run_closed_loop: horizon must be >= 1");
  }
  auto rng = split_stream(seed, trial_index);
  auto arrival_rng = arrival_stream(seed, trial_index);
  auto est = estimators::initial_state(scheme);
  ClosedLoopResult out;
  out.total_arrivals = options.initial_backlog.size();
  Backlog backlog(std::move(options.initial_backlog));
  if (options.record_trace) {
    out.trace.reserve(horizon);
  }
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const std::uint64_t arrivals = traffic::sample_arrivals(model, arrival_rng);
    out.total_arrivals += arrivals;
    auto step = advance(est, backlog, rng, t, arrivals);
    if (step.served) {
      out.delays.push_back(*step.served);
    }
    if (options.record_trace) {
      out.trace.push_back(step.record);
    }
  }
  out.residual = std::move(backlog);
  return out;
}

std::vector<SlotRecord> run_step_response(std::uint64_t n, const SchemeParams& scheme,
                                          std::uint64_t horizon, std::uint64_t seed,
                                          std::uint64_t trial_index) {
  if (n < 1) {
    throw std::invalid_argument("run_step_response: n must be >= 1");
  }
  auto rng = split_stream(seed, trial_index);
  auto est = estimators::initial_state(scheme);
  std::vector<SlotRecord> trace;
  trace.reserve(horizon);
  for (std::uint64_t t = 0; t < horizon; ++t) {
    SlotRecord rec;
    rec.t = t;
    rec.n = n;
    rec.n_hat = est.n_hat;
    rec.streak = est.streak;
    rec.p = estimators::tx_probability(est, n);
    rec.expected_throughput = expected_throughput(n, rec.p);
    rec.z = contend(n, rec.p, rng).z;
    est = estimators::observe(std::move(est), rec.z);
    trace.push_back(rec);
  }
  return trace;
}

std::uint64_t default_single_event_cap(std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>(std::ceil(100.0 * std::numbers::e * static_cast<double>(n)));
}

SingleEventResult run_single_event(std::uint64_t n, const SchemeParams& scheme,
                                   std::uint64_t seed, std::uint64_t trial_index,
                                   std::optional<std::uint64_t> max_slots) {
  if (n < 1) {
    throw std::invalid_argument("run_single_event: n must be >= 1");
  }
  const std::uint64_t cap = max_slots.value_or(default_single_event_cap(n));
  auto rng = split_stream(seed, trial_index);
  auto est = estimators::initial_state(scheme);
  Backlog backlog(std::vector<std::uint64_t>(n, 0));
  SingleEventResult out;
  out.delays.reserve(n);
  std::uint64_t t = 0;
  for (; t < cap && !backlog.empty(); ++t) {
    auto step = advance(est, backlog, rng, t, 0);
    if (step.served) {
      out.delays.push_back(*step.served);
    }
  }
  out.slots = t;
  out.truncated = !backlog.empty();
  return out;
}

RepetitiveResult run_repetitive(const traffic::ArrivalModel& model, const SchemeParams& scheme,
                                std::uint64_t horizon, std::uint64_t warmup, std::uint64_t seed,
                                std::uint64_t trial_index) {
  if (warmup >= horizon) {
    throw std::invalid_argument("run_repetitive: warmup must be < horizon");
  }
  auto rng = split_stream(seed, trial_index);
  auto arrival_rng = arrival_stream(seed, trial_index);
  auto est = estimators::initial_state(scheme);
  Backlog backlog;
  RepetitiveResult out;
  double delay_sum = 0.0;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const std::uint64_t arrivals = traffic::sample_arrivals(model, arrival_rng);
    out.total_arrivals += arrivals;
    auto step = advance(est, backlog, rng, t, arrivals);
    if (step.served) {
      ++out.total_completed;
      if (step.served->arrival_slot >= warmup) {
        ++out.completed;
        delay_sum += static_cast<double>(step.served->delay());
      }
    }
  }
  out.residual = backlog.size();
  if (out.completed > 0) {
    out.mean_delay = delay_sum / static_cast<double>(out.completed);
  }
  return out;
}

void write_trace_csv(std::ostream& out, std::span<const SlotRecord> trace) {
  out << "t,n,n_hat,p,z,arrivals\n";
  for (const auto& r : trace) {
    out << r.t << ',' << r.n << ',' << csv::number(r.n_hat) << ',' << csv::number(r.p) << ','
        << outcome_code(r.z) << ',' << r.arrivals << '\n';
  }
}

}  // namespace fasa::sim
