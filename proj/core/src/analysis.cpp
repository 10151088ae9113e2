#include "fasa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "fasa/csv.hpp"

namespace fasa::analysis {

double mu(double nu, double q, int k_max) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw std::invalid_argument("mu: nu must be finite and >= 0");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("mu: q must lie in [0, 1]");
  }
  if (k_max <= 1) {
    throw std::invalid_argument("mu: k_max must be > 1");
  }
  double total = 0.0;
  double q_pow = 1.0;  // q^(k-1), with q^0 = 1 even at q = 0
  for (int k = 1; k < k_max; ++k) {
    total += std::pow(static_cast<double>(k), nu) * q_pow * (1.0 - q);
    q_pow *= q;
  }
  total += std::pow(static_cast<double>(k_max), nu) * q_pow;
  return total;
}

FasaDesign make_design(double eta, double nu, int k_max) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("make_design: eta must be > 0");
  }
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw std::invalid_argument("make_design: nu must be >= 0");
  }
  if (k_max <= 1) {
    throw std::invalid_argument("make_design: k_max must be > 1");
  }
  FasaDesign d;
  d.eta = eta;
  d.nu = nu;
  d.k_max = k_max;
  d.h_idle = eta / (kIdleStar * mu(nu, kIdleStar, k_max));
  d.h_collision = eta / (kCollisionStar * mu(nu, kCollisionStar, k_max));
  return d;
}

OfferedLoadPoint OfferedLoadPoint::at(double rho) noexcept {
  OfferedLoadPoint p;
  p.rho = rho;
  p.q_idle = std::exp(-rho);
  p.q_success = rho * p.q_idle;
  p.q_collision = 1.0 - p.q_idle - p.q_success;
  return p;
}

double drift_phi(const FasaDesign& design, double rho) {
  const auto pt = OfferedLoadPoint::at(rho);
  const double idle_step = 1.0 + design.h_idle * mu(design.nu, pt.q_idle, design.k_max);
  const double collision_step =
      kCollisionStep + design.h_collision * mu(design.nu, pt.q_collision, design.k_max);
  return -pt.q_idle * idle_step + pt.q_collision * collision_step;
}

double drift_psi(const FasaDesign& design, double rho, double lambda_bar) {
  return drift_phi(design, rho) - (lambda_bar - rho * std::exp(-rho));
}

double omega_root(const FasaDesign& design, double lambda_bar) {
  if (!(lambda_bar > 0.0 && lambda_bar <= kInvE)) {
    throw std::invalid_argument("omega_root: lambda_bar must lie in (0, 1/e]");
  }
  constexpr double kTol = 1e-10;
  double hi = 1.0;
  if (std::fabs(drift_psi(design, hi, lambda_bar)) < kTol) {
    return hi;
  }
  double lo = 0.5;
  while (drift_psi(design, lo, lambda_bar) >= 0.0) {
    lo *= 0.5;
    if (lo < 1e-300) {
      throw std::runtime_error("omega_root: failed to bracket the root");
    }
  }
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double value = drift_psi(design, mid, lambda_bar);
    if (std::fabs(value) < kTol || mid == lo || mid == hi) {
      return mid;
    }
    (value < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double kelly_drift(double a_idle, double a_success, double a_collision, double rho) noexcept {
  const double e = std::exp(-rho);
  return (a_idle - a_collision) * e + (a_success - a_collision) * rho * e + a_collision;
}

SquareMatrix SquareMatrix::operator*(const SquareMatrix& rhs) const {
  if (dim_ != rhs.dim_) {
    throw std::invalid_argument("SquareMatrix: dimension mismatch");
  }
  SquareMatrix out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t k = 0; k < dim_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) {
        continue;
      }
      for (std::size_t j = 0; j < dim_; ++j) {
        out(i, j) += a * rhs(k, j);
      }
    }
  }
  return out;
}

SquareMatrix SquareMatrix::power(unsigned exponent) const {
  SquareMatrix result(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    result(i, i) = 1.0;
  }
  for (unsigned e = 0; e < exponent; ++e) {
    result = result * (*this);
  }
  return result;
}

int next_streak(int streak, int outcome, int k_max) noexcept {
  switch (outcome) {
    case 0:
      return streak < 0 ? -std::min(-streak + 1, k_max) : -1;
    case 1:
      return 0;
    default:
      return streak > 0 ? std::min(streak + 1, k_max) : 1;
  }
}

StreakChain build_streak_chain(double rho, int k_max) {
  if (!(rho > 0.0)) {
    throw std::invalid_argument("build_streak_chain: rho must be > 0");
  }
  if (k_max <= 1) {
    throw std::invalid_argument("build_streak_chain: k_max must be > 1");
  }
  const auto pt = OfferedLoadPoint::at(rho);
  const double q[3] = {pt.q_idle, pt.q_success, pt.q_collision};

  StreakChain chain;
  chain.rho = rho;
  chain.k_max = k_max;
  chain.transition = SquareMatrix(chain.size());
  for (int k = -k_max; k <= k_max; ++k) {
    for (int z = 0; z < 3; ++z) {
      chain.transition(chain.index_of(k), chain.index_of(next_streak(k, z, k_max))) += q[z];
    }
  }

  chain.stationary.assign(chain.size(), 0.0);
  for (int k = -k_max; k <= k_max; ++k) {
    double value = 0.0;
    if (k == -k_max) {
      value = std::pow(pt.q_idle, k_max);
    } else if (k < 0) {
      value = std::pow(pt.q_idle, -k) * (1.0 - pt.q_idle);
    } else if (k == 0) {
      value = pt.q_success;
    } else if (k < k_max) {
      value = std::pow(pt.q_collision, k) * (1.0 - pt.q_collision);
    } else {
      value = std::pow(pt.q_collision, k_max);
    }
    chain.stationary[chain.index_of(k)] = value;
  }
  return chain;
}

VirtualDrifts virtual_drifts(const FasaDesign& design, double rho, double lambda_bar, int k0,
                             int horizon) {
  if (horizon <= 0) {
    throw std::invalid_argument("virtual_drifts: horizon must be > 0");
  }
  if (k0 < -design.k_max || k0 > design.k_max) {
    throw std::invalid_argument("virtual_drifts: k0 outside [-k_max, k_max]");
  }
  const auto chain = build_streak_chain(rho, design.k_max);
  const auto pt = OfferedLoadPoint::at(rho);
  const std::size_t dim = chain.size();

  // Expected estimate increment of one slot, conditioned on the streak state
  // at the start of the slot.
  std::vector<double> increment(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    const int k = chain.state_of(i);
    const int after_idle = next_streak(k, 0, design.k_max);
    const int after_collision = next_streak(k, 2, design.k_max);
    const double idle =
        -1.0 - design.h_idle * std::pow(static_cast<double>(std::abs(after_idle)), design.nu);
    const double collision =
        kCollisionStep +
        design.h_collision * std::pow(static_cast<double>(after_collision), design.nu);
    increment[i] = pt.q_idle * idle + pt.q_collision * collision;
  }

  std::vector<double> dist(dim, 0.0);
  std::vector<double> next(dim, 0.0);
  dist[chain.index_of(k0)] = 1.0;

  VirtualDrifts out;
  out.per_slot_estimate.reserve(static_cast<std::size_t>(horizon));
  for (int s = 0; s < horizon; ++s) {
    double slot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      slot += dist[i] * increment[i];
    }
    out.per_slot_estimate.push_back(slot);
    out.estimate += slot;

    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      if (dist[i] == 0.0) {
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) {
        next[j] += dist[i] * chain.transition(i, j);
      }
    }
    dist.swap(next);
  }
  out.backlog = static_cast<double>(horizon) * (lambda_bar - pt.q_success);
  out.error = out.estimate - out.backlog;
  return out;
}

KellyInstance pb_kelly_instance(double lambda_hat) {
  return KellyInstance{"pb", lambda_hat - 1.0, lambda_hat - 1.0, lambda_hat + kCollisionStep};
}

std::vector<double> make_rho_grid(double start, double stop, double step) {
  if (!(start > 0.0) || !(step > 0.0) || stop < start) {
    throw std::invalid_argument("rho grid needs 0 < start <= stop and step > 0");
  }
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid.push_back(start + static_cast<double>(i) * step);
  }
  return grid;
}

std::vector<double> default_rho_grid() {
  std::vector<double> grid;
  grid.reserve(600);
  for (int i = 1; i <= 600; ++i) {
    grid.push_back(i * 0.01);
  }
  return grid;
}

std::vector<DriftCurveRow> emit_drift_curves(std::span<const LabelledDesign> designs,
                                             std::span<const KellyInstance> kelly,
                                             std::span<const double> rho_grid) {
  for (double rho : rho_grid) {
    if (!(rho > 0.0)) {
      throw std::invalid_argument("emit_drift_curves: rho grid must be strictly positive");
    }
  }
  std::vector<DriftCurveRow> rows;
  rows.reserve((designs.size() + kelly.size()) * rho_grid.size());
  for (const auto& d : designs) {
    for (double rho : rho_grid) {
      rows.push_back({d.label, rho, drift_phi(d.design, rho)});
    }
  }
  for (const auto& k : kelly) {
    for (double rho : rho_grid) {
      rows.push_back({k.label, rho, kelly_drift(k.a_idle, k.a_success, k.a_collision, rho)});
    }
  }
  return rows;
}

void write_drift_curves_csv(std::ostream& out, std::span<const DriftCurveRow> rows) {
  out << "scheme,rho,drift\n";
  for (const auto& r : rows) {
    out << csv::field(r.scheme) << ',' << csv::number(r.rho) << ',' << csv::number(r.drift)
        << '\n';
  }
}

}  // namespace fasa::analysis
