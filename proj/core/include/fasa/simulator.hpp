#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fasa/estimators.hpp"
#include "fasa/rng.hpp"
#include "fasa/traffic.hpp"

namespace fasa::sim {

using estimators::SchemeParams;

inline constexpr std::uint64_t kArrivalStreamSalt = 0x41525249564C53ULL;

/// split_stream(derive_seed(seed, kArrivalStreamSalt), trial_index).
RngStream arrival_stream(std::uint64_t seed, std::uint64_t trial_index) noexcept;

struct SlotRecord {
  std::uint64_t t = 0;
  std::uint64_t n = 0;  ///< backlog at transmission time (after this slot's arrivals)
  double n_hat = 1.0;
  int streak = 0;  ///< K_t, the streak before this slot's outcome
  double p = 1.0;
  SlotOutcome z = SlotOutcome::Idle;
  std::uint64_t arrivals = 0;
  double expected_throughput = 0.0;
};

struct DelaySample {
  std::uint64_t arrival_slot = 0;
  std::uint64_t success_slot = 0;

  std::uint64_t delay() const noexcept { return success_slot - arrival_slot; }
};

/// Waiting devices, stored by arrival slot. Removal order is uniform random.
class Backlog {
 public:
  Backlog() = default;
  explicit Backlog(std::vector<std::uint64_t> arrival_slots)
      : arrival_slots_(std::move(arrival_slots)) {}

  void add(std::uint64_t arrival_slot, std::uint64_t count);
  /// Removes a uniformly chosen device and returns its arrival slot. One
  /// uniform_below draw. Requires size() > 0.
  std::uint64_t remove_uniform(RngStream& rng);

  std::uint64_t size() const noexcept { return arrival_slots_.size(); }
  bool empty() const noexcept { return arrival_slots_.empty(); }
  std::span<const std::uint64_t> arrival_slots() const noexcept { return arrival_slots_; }

 private:
  std::vector<std::uint64_t> arrival_slots_;
};

struct ContentionResult {
  SlotOutcome z = SlotOutcome::Idle;
  std::uint64_t transmitters = 0;
};

/// Transmitter count ~ Binomial(n, p) drawn with traffic::sample_binomial.
ContentionResult contend(std::uint64_t n, double p, RngStream& rng);

/// n p (1 - p)^(n - 1); 0 when n = 0.
double expected_throughput(std::uint64_t n, double p) noexcept;

struct ClosedLoopOptions {
  std::vector<std::uint64_t> initial_backlog;
  bool record_trace = true;
};

struct ClosedLoopResult {
  std::vector<SlotRecord> trace;
  std::vector<DelaySample> delays;
  Backlog residual;
  std::uint64_t total_arrivals = 0;  ///< includes the initial backlog
};

/// Slot loop shared by all drivers. Per slot, in this order:
///   1. arrivals A_t = sample_arrivals(model) join the backlog with slot t;
///   2. p_t from the estimator (oracle reads N_t);
///   3. contend(N_t, p_t);
///   4. on success one uniformly chosen device leaves (delay = t - arrival);
///   5. the estimator observes Z_t.
/// Arrivals draw from arrival_stream(seed, trial_index); contention and
/// removal draw from split_stream(seed, trial_index). Keeping the two apart
/// means every scheme run with the same (seed, trial_index) sees the same
/// realized arrival sequence.
ClosedLoopResult run_closed_loop(const traffic::ArrivalModel& model, const SchemeParams& scheme,
                                 std::uint64_t horizon, std::uint64_t seed,
                                 std::uint64_t trial_index, ClosedLoopOptions options = {});

/// Backlog pinned at n in every slot; successes do not deplete it and no
/// arrival draws are made.
std::vector<SlotRecord> run_step_response(std::uint64_t n, const SchemeParams& scheme,
                                          std::uint64_t horizon, std::uint64_t seed,
                                          std::uint64_t trial_index);

struct SingleEventResult {
  std::vector<DelaySample> delays;  ///< in success order
  std::uint64_t slots = 0;
  bool truncated = false;  ///< safety cap hit before the backlog emptied
};

/// Default cap: ceil(100 e n) slots.
std::uint64_t default_single_event_cap(std::uint64_t n) noexcept;

/// n devices arrive in slot 0; runs without further arrivals until the
/// backlog empties or `max_slots` is reached.
SingleEventResult run_single_event(std::uint64_t n, const SchemeParams& scheme,
                                   std::uint64_t seed, std::uint64_t trial_index,
                                   std::optional<std::uint64_t> max_slots = std::nullopt);

struct RepetitiveResult {
  std::optional<double> mean_delay;  ///< absent when no post-warmup sample completed
  std::uint64_t completed = 0;       ///< post-warmup arrivals served
  std::uint64_t residual = 0;        ///< backlog left at the horizon
  std::uint64_t total_arrivals = 0;
  std::uint64_t total_completed = 0;
};

/// Closed loop without trace recording; delay samples with
/// arrival_slot < warmup are discarded.
RepetitiveResult run_repetitive(const traffic::ArrivalModel& model, const SchemeParams& scheme,
                                std::uint64_t horizon, std::uint64_t warmup, std::uint64_t seed,
                                std::uint64_t trial_index);

/// CSV `t,n,n_hat,p,z,arrivals` with z in {0,1,c}.
void write_trace_csv(std::ostream& out, std::span<const SlotRecord> trace);

}  // namespace fasa::sim
