#include "fasa/estimators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

#include "fasa/csv.hpp"

namespace fasa {

char outcome_code(SlotOutcome z) noexcept {
  switch (z) {
    case SlotOutcome::Idle:
      return '0';
    case SlotOutcome::Success:
      return '1';
    case SlotOutcome::Collision:
      return 'c';
  }
  return '?';
}

}  // namespace fasa

namespace fasa::estimators {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double power(int base, double nu) { return std::pow(static_cast<double>(base), nu); }

}  // namespace

EstimatorState initial_state(SchemeParams params) {
  return EstimatorState{std::move(params), 1.0, 0};
}

bool is_oracle(const SchemeParams& params) noexcept {
  return std::holds_alternative<OracleParams>(params);
}

double tx_probability(const EstimatorState& state, std::optional<std::uint64_t> true_n) {
  if (is_oracle(state.params)) {
    if (!true_n) {
      throw ContractError("oracle policy needs the true backlog");
    }
    return *true_n <= 1 ? 1.0 : 1.0 / static_cast<double>(*true_n);
  }
  return std::min(1.0, 1.0 / state.n_hat);
}

EstimatorState fasa_observe(EstimatorState state, SlotOutcome z) {
  const auto& d = std::get<FasaParams>(state.params).design;
  switch (z) {
    case SlotOutcome::Idle:
      state.streak = analysis::next_streak(state.streak, 0, d.k_max);
      state.n_hat = std::max(1.0, state.n_hat - 1.0 - d.h_idle * power(-state.streak, d.nu));
      break;
    case SlotOutcome::Success:
      state.streak = 0;
      break;
    case SlotOutcome::Collision:
      state.streak = analysis::next_streak(state.streak, 2, d.k_max);
      state.n_hat += analysis::kCollisionStep + d.h_collision * power(state.streak, d.nu);
      break;
  }
  return state;
}

EstimatorState pb_observe(EstimatorState state, SlotOutcome z) {
  const double lh = std::get<PbParams>(state.params).lambda_hat;
  if (z == SlotOutcome::Collision) {
    state.n_hat += lh + analysis::kCollisionStep;
  } else {
    state.n_hat = std::max(lh, state.n_hat + lh - 1.0);
  }
  return state;
}

EstimatorState kelly_observe(EstimatorState state, SlotOutcome z) {
  const auto& k = std::get<KellyParams>(state.params);
  const double step = z == SlotOutcome::Idle      ? k.a_idle
                      : z == SlotOutcome::Success ? k.a_success
                                                  : k.a_collision;
  state.n_hat = std::max(1.0, state.n_hat + step);
  return state;
}

EstimatorState qplus_observe(EstimatorState state, SlotOutcome z) {
  const auto& q = std::get<QPlusParams>(state.params);
  if (z == SlotOutcome::Idle) {
    state.n_hat = std::max(1.0, state.n_hat / q.zeta_idle);
  } else if (z == SlotOutcome::Collision) {
    state.n_hat = std::max(1.0, state.n_hat * q.zeta_collision);
  }
  return state;
}

EstimatorState observe(EstimatorState state, SlotOutcome z) {
  return std::visit(Overloaded{
                        [&](const FasaParams&) { return fasa_observe(std::move(state), z); },
                        [&](const PbParams&) { return pb_observe(std::move(state), z); },
                        [&](const KellyParams&) { return kelly_observe(std::move(state), z); },
                        [&](const QPlusParams&) { return qplus_observe(std::move(state), z); },
                        [&](const OracleParams&) { return state; },
                    },
                    state.params);
}

namespace {

using KeyValues = std::map<std::string, double, std::less<>>;

[[noreturn]] void fail(std::string_view text, const std::string& why) {
  throw std::invalid_argument("scheme '" + std::string(text) + "': " + why);
}

KeyValues parse_arguments(std::string_view full, std::string_view args) {
  KeyValues out;
  if (args.empty()) {
    return out;
  }
  std::size_t pos = 0;
  while (pos <= args.size()) {
    const std::size_t end = std::min(args.find(',', pos), args.size());
    const std::string_view item = args.substr(pos, end - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      fail(full, "expected key=value, got '" + std::string(item) + "'");
    }
    const std::string_view key = item.substr(0, eq);
    const std::string_view val = item.substr(eq + 1);
    double number = 0.0;
    const auto res = std::from_chars(val.data(), val.data() + val.size(), number);
    if (res.ec != std::errc{} || res.ptr != val.data() + val.size() || !std::isfinite(number)) {
      fail(full, "value of '" + std::string(key) + "' is not a number");
    }
    if (!out.emplace(std::string(key), number).second) {
      fail(full, "repeated key '" + std::string(key) + "'");
    }
    if (end == args.size()) {
      break;
    }
    pos = end + 1;
  }
  return out;
}

void allow_only(std::string_view full, const KeyValues& kv,
                std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : kv) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(full, "unknown key '" + key + "'");
    }
  }
}

double required(std::string_view full, const KeyValues& kv, std::string_view key) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    fail(full, "missing key '" + std::string(key) + "'");
  }
  return it->second;
}

double optional_or(const KeyValues& kv, std::string_view key, double fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

}  // namespace

SchemeParams parse_scheme(std::string_view text) {
  const std::size_t colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view args =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (colon != std::string_view::npos && args.empty()) {
    fail(text, "empty argument list");
  }
  const KeyValues kv = parse_arguments(text, args);

  if (name == "fasa") {
    allow_only(text, kv, {"eta", "nu", "km"});
    const double km = optional_or(kv, "km", kDefaultStreakCap);
    if (km != std::floor(km) || km < 2 || km > 4096) {
      fail(text, "km must be an integer in [2, 4096]");
    }
    try {
      return FasaParams{
          analysis::make_design(required(text, kv, "eta"), required(text, kv, "nu"),
                                static_cast<int>(km))};
    } catch (const std::invalid_argument& e) {
      fail(text, e.what());
    }
  }
  if (name == "pb") {
    allow_only(text, kv, {"lh"});
    const double lh = optional_or(kv, "lh", analysis::kInvE);
    if (!(lh > 0.0)) {
      fail(text, "lh must be > 0");
    }
    return PbParams{lh};
  }
  if (name == "qplus") {
    allow_only(text, kv, {"z0", "zc"});
    const QPlusParams q{optional_or(kv, "z0", kQPlusIdleDivisor),
                        optional_or(kv, "zc", kQPlusCollisionFactor)};
    if (!(q.zeta_idle > 1.0) || !(q.zeta_collision > 1.0)) {
      fail(text, "z0 and zc must be > 1");
    }
    return q;
  }
  if (name == "kelly") {
    allow_only(text, kv, {"a0", "a1", "ac"});
    return KellyParams{required(text, kv, "a0"), required(text, kv, "a1"),
                       required(text, kv, "ac")};
  }
  if (name == "oracle") {
    if (!kv.empty()) {
      fail(text, "oracle takes no arguments");
    }
    return OracleParams{};
  }
  fail(text, "unknown scheme '" + std::string(name) + "'");
}

std::string format_scheme(const SchemeParams& params) {
  using csv::number;
  return std::visit(
      Overloaded{
          [](const FasaParams& f) {
            return "fasa:eta=" + number(f.design.eta) + ",nu=" + number(f.design.nu) +
                   ",km=" + std::to_string(f.design.k_max);
          },
          [](const PbParams& p) { return "pb:lh=" + number(p.lambda_hat); },
          [](const KellyParams& k) {
            return "kelly:a0=" + number(k.a_idle) + ",a1=" + number(k.a_success) +
                   ",ac=" + number(k.a_collision);
          },
          [](const QPlusParams& q) {
            return "qplus:z0=" + number(q.zeta_idle) + ",zc=" + number(q.zeta_collision);
          },
          [](const OracleParams&) { return std::string("oracle"); },
      },
      params);
}

}  // namespace fasa::estimators
