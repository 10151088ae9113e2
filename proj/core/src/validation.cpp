#include "fasa/validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fasa/analysis.hpp"
#include "fasa/estimators.hpp"
#include "fasa/simulator.hpp"

namespace fasa::validation {

namespace {

using namespace analysis;

constexpr double kEqualTol = 1e-12;

const double kEtas[] = {0.5, 1.0, 2.0};
const double kNus[] = {0.0, 1.0, 2.0, 3.0};
const int kCaps[] = {2, 5, 20};

template <class F>
void for_each_design(F&& f) {
  for (double eta : kEtas) {
    for (double nu : kNus) {
      for (int km : kCaps) {
        f(make_design(eta, nu, km));
      }
    }
  }
}

std::string label(const FasaDesign& d) {
  std::ostringstream os;
  os << "(eta=" << d.eta << ", nu=" << d.nu << ", km=" << d.k_max << ")";
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

Check phi_at_one() {
  Check c{"phi(1) = 0 within 1e-12", true, {}};
  double worst = 0.0;
  for_each_design([&](const FasaDesign& d) {
    const double v = std::abs(drift_phi(d, 1.0));
    worst = std::max(worst, v);
    if (v > kEqualTol && c.passed) {
      c.passed = false;
      c.detail = label(d) + " gives " + sci(v);
    }
  });
  if (c.passed) {
    c.detail = "max |phi(1)| = " + sci(worst) + " over 36 designs";
  }
  return c;
}

Check phi_increasing_and_signs(std::span<const double> grid) {
  Check c{"phi strictly increasing on the rho grid, negative below 1, positive above", true, {}};
  for_each_design([&](const FasaDesign& d) {
    double prev = -INFINITY;
    for (double rho : grid) {
      const double v = drift_phi(d, rho);
      const bool sign_ok = rho < 1.0 ? v < 0.0 : (rho > 1.0 ? v > 0.0 : true);
      if ((!(v > prev) || !sign_ok) && c.passed) {
        c.passed = false;
        c.detail = label(d) + " fails at rho = " + std::to_string(rho);
      }
      prev = v;
    }
  });
  if (c.passed) {
    c.detail = std::to_string(grid.size()) + " grid points, 36 designs";
  }
  return c;
}

Check mu_monotone() {
  Check c{"mu(nu, q, km) nondecreasing in q", true, {}};
  for (double nu : kNus) {
    for (int km : kCaps) {
      double prev = mu(nu, 0.0, km);
      for (int i = 1; i <= 100; ++i) {
        const double q = i / 100.0;
        const double v = mu(nu, q, km);
        if (v < prev - kEqualTol && c.passed) {
          c.passed = false;
          c.detail = "nu=" + std::to_string(nu) + ", km=" + std::to_string(km) +
                     " decreases at q = " + std::to_string(q);
        }
        prev = v;
      }
    }
  }
  if (c.passed) {
    c.detail = "q = 0, 0.01, ..., 1 for every (nu, km)";
  }
  return c;
}

struct ChainErrors {
  double sum = 0.0;
  double balance = 0.0;
  double mixing = 0.0;
};

ChainErrors chain_errors(double rho, int km) {
  const auto chain = build_streak_chain(rho, km);
  ChainErrors e;
  const std::size_t n = chain.size();
  double total = 0.0;
  for (double p : chain.stationary) {
    total += p;
  }
  e.sum = std::abs(total - 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v += chain.stationary[i] * chain.transition(i, j);
    }
    e.balance = std::max(e.balance, std::abs(v - chain.stationary[j]));
  }
  const auto pk = chain.transition.power(static_cast<unsigned>(km));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      e.mixing = std::max(e.mixing, std::abs(pk(i, j) - chain.stationary[j]));
    }
  }
  return e;
}

std::vector<Check> chain_checks() {
  const double rhos[] = {0.05, 0.3, 1.0, 2.0, 6.0};
  ChainErrors worst;
  for (int km : kCaps) {
    for (double rho : rhos) {
      const auto e = chain_errors(rho, km);
      worst.sum = std::max(worst.sum, e.sum);
      worst.balance = std::max(worst.balance, e.balance);
      worst.mixing = std::max(worst.mixing, e.mixing);
    }
  }
  return {
      {"stationary distribution sums to 1", worst.sum <= kEqualTol, "max error " + sci(worst.sum)},
      {"pi P = pi", worst.balance <= kEqualTol, "max error " + sci(worst.balance)},
      {"every row of P^km equals pi", worst.mixing <= kEqualTol,
       "max error " + sci(worst.mixing)},
  };
}

std::vector<Check> omega_checks() {
  Check at_optimum{"omega(1/e) = 1 within 1e-8", true, {}};
  Check below{"omega e^-omega > lambda_bar for lambda_bar = 0.05, ..., 0.35", true, {}};
  double worst = 0.0;
  for_each_design([&](const FasaDesign& d) {
    const double w = omega_root(d, kInvE);
    worst = std::max(worst, std::abs(w - 1.0));
    if (std::abs(w - 1.0) > 1e-8 && at_optimum.passed) {
      at_optimum.passed = false;
      at_optimum.detail = label(d) + " gives " + std::to_string(w);
    }
    for (int i = 1; i <= 7; ++i) {
      const double lb = 0.05 * i;
      const double r = omega_root(d, lb);
      if (!(r > 0.0 && r < 1.0 && r * std::exp(-r) > lb) && below.passed) {
        below.passed = false;
        below.detail = label(d) + " at lambda_bar = " + std::to_string(lb);
      }
    }
  });
  if (at_optimum.passed) {
    at_optimum.detail = "max |omega - 1| = " + sci(worst);
  }
  if (below.passed) {
    below.detail = "36 designs x 7 rates";
  }
  return {at_optimum, below};
}

Check virtual_drift_matches_phi() {
  Check c{"virtual per-slot estimate drift equals phi for s >= km", true, {}};
  const double rhos[] = {0.2, 1.0, 3.0};
  double worst = 0.0;
  for_each_design([&](const FasaDesign& d) {
    for (double rho : rhos) {
      const double phi = drift_phi(d, rho);
      for (int k0 : {-d.k_max, 0, d.k_max}) {
        const auto v = virtual_drifts(d, rho, 0.3, k0, d.k_max + 5);
        for (int s = d.k_max; s < d.k_max + 5; ++s) {
          const double e = std::abs(v.per_slot_estimate[static_cast<std::size_t>(s)] - phi);
          worst = std::max(worst, e / std::max(1.0, std::abs(phi)));
        }
      }
    }
  });
  c.passed = worst <= 1e-10;
  c.detail = "max relative error " + sci(worst);
  return c;
}

std::vector<Check> kelly_checks() {
  const auto pb = pb_kelly_instance();
  const double root = kelly_drift(pb.a_idle, pb.a_success, pb.a_collision, 1.0);
  const double near_zero = kelly_drift(pb.a_idle, pb.a_success, pb.a_collision, 1e-9);
  const double far = kelly_drift(pb.a_idle, pb.a_success, pb.a_collision, 60.0);
  const bool limits = std::abs(near_zero - pb.a_idle) < 1e-8 &&
                      std::abs(far - pb.a_collision) < 1e-8;
  return {
      {"PB drift vanishes at rho = 1", std::abs(root) <= kEqualTol, "drift " + sci(root)},
      {"fixed-step drift limits a0 (rho -> 0) and ac (rho -> inf)", limits,
       "rho=1e-9: " + sci(near_zero - pb.a_idle) + ", rho=60: " + sci(far - pb.a_collision)},
  };
}

Check conservation_smoke() {
  Check c{"backlog conservation on a 10^4-slot closed loop", true, {}};
  const auto model = traffic::ArrivalModel::from_rate(0.3, 0.01);
  const auto scheme = estimators::parse_scheme("fasa:eta=1,nu=2");
  const auto r = sim::run_closed_loop(model, scheme, 10000, 1, 0);
  for (std::size_t t = 0; t + 1 < r.trace.size(); ++t) {
    const auto& a = r.trace[t];
    const auto& b = r.trace[t + 1];
    const std::uint64_t served = a.z == SlotOutcome::Success ? 1 : 0;
    if (b.n != a.n - served + b.arrivals) {
      c.passed = false;
      c.detail = "slot " + std::to_string(t + 1);
      return c;
    }
  }
  const std::uint64_t accounted = r.delays.size() + r.residual.size();
  c.passed = accounted == r.total_arrivals;
  c.detail = std::to_string(r.total_arrivals) + " arrivals, " + std::to_string(r.delays.size()) +
             " served, " + std::to_string(r.residual.size()) + " waiting";
  return c;
}

}  // namespace

std::vector<Check> run_validation() {
  const auto grid = default_rho_grid();
  std::vector<Check> out;
  out.push_back(phi_at_one());
  out.push_back(phi_increasing_and_signs(grid));
  out.push_back(mu_monotone());
  for (auto& c : chain_checks()) {
    out.push_back(std::move(c));
  }
  for (auto& c : omega_checks()) {
    out.push_back(std::move(c));
  }
  out.push_back(virtual_drift_matches_phi());
  for (auto& c : kelly_checks()) {
    out.push_back(std::move(c));
  }
  out.push_back(conservation_smoke());
  return out;
}

bool all_passed(std::span<const Check> checks) noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

}  // namespace fasa::validation
