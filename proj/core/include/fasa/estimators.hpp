#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "fasa/analysis.hpp"

namespace fasa {

/// Ternary channel feedback of one slot.
enum class SlotOutcome : std::uint8_t { Idle, Success, Collision };

/// '0', '1' or 'c'.
char outcome_code(SlotOutcome z) noexcept;

/// Raised when an estimator is used outside its contract (e.g. the oracle
/// without the true backlog).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fasa

namespace fasa::estimators {

inline constexpr int kDefaultStreakCap = 20;
inline constexpr double kQPlusIdleDivisor = 1.189207115002721;     // 2^0.25
inline constexpr double kQPlusCollisionFactor = 1.2745606273192622; // 2^0.35

struct FasaParams {
  analysis::FasaDesign design;
};

/// Pseudo-Bayesian ALOHA with a fixed arrival-rate estimate.
struct PbParams {
  double lambda_hat = analysis::kInvE;
};

/// Generic additive fixed-step estimator.
struct KellyParams {
  double a_idle = 0.0;
  double a_success = 0.0;
  double a_collision = 0.0;
};

/// Multiplicative Q+ estimator: divide by zeta_idle on idle, multiply by
/// zeta_collision on collision.
struct QPlusParams {
  double zeta_idle = kQPlusIdleDivisor;
  double zeta_collision = kQPlusCollisionFactor;
};

/// Perfect-information policy, p = 1/N.
struct OracleParams {};

using SchemeParams = std::variant<FasaParams, PbParams, KellyParams, QPlusParams, OracleParams>;

/// Estimate plus FASA streak memory. Baselines leave `streak` at 0.
struct EstimatorState {
  SchemeParams params;
  double n_hat = 1.0;
  int streak = 0;
};

/// (n_hat, streak) = (1, 0).
EstimatorState initial_state(SchemeParams params);

/// min(1, 1/n_hat) for estimators; the oracle returns 1 when true_n <= 1 and
/// 1/true_n otherwise. Throws ContractError for the oracle without true_n.
double tx_probability(const EstimatorState& state, std::optional<std::uint64_t> true_n);

/// FASA: the streak is updated first, then the estimate uses the new streak.
EstimatorState fasa_observe(EstimatorState state, SlotOutcome z);
EstimatorState pb_observe(EstimatorState state, SlotOutcome z);
EstimatorState kelly_observe(EstimatorState state, SlotOutcome z);
EstimatorState qplus_observe(EstimatorState state, SlotOutcome z);

/// Dispatches on the scheme held in `state`. Oracle states are unchanged.
EstimatorState observe(EstimatorState state, SlotOutcome z);

bool is_oracle(const SchemeParams& params) noexcept;

/// Parses the scheme grammar
///
///     fasa:eta=<r>,nu=<r>[,km=<int>]     (km defaults to 20)
///     pb[:lh=<r>]                        (lh defaults to 1/e)
///     qplus[:z0=<r>,zc=<r>]              (defaults 2^0.25, 2^0.35)
///     kelly:a0=<r>,a1=<r>,ac=<r>
///     oracle
///
/// Unknown schemes, unknown or repeated keys, missing required keys and
/// domain violations throw std::invalid_argument.
SchemeParams parse_scheme(std::string_view text);

/// Canonical form accepted by parse_scheme, with every key spelled out.
std::string format_scheme(const SchemeParams& params);

}  // namespace fasa::estimators
