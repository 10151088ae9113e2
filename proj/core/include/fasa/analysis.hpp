#pragma once

#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace fasa::analysis {

inline constexpr double kInvE = 1.0 / std::numbers::e;
/// Idle probability at the optimal offered load rho = 1.
inline constexpr double kIdleStar = kInvE;
/// Collision probability at rho = 1.
inline constexpr double kCollisionStar = 1.0 - 2.0 * kInvE;
/// Fixed collision increment 1/(e - 2) shared by FASA and PB-ALOHA.
inline constexpr double kCollisionStep = 1.0 / (std::numbers::e - 2.0);

/// Truncated streak moment
///
///     mu(nu, q, k_max) = sum_{k=1}^{k_max-1} k^nu q^{k-1} (1-q) + k_max^nu q^{k_max-1}
///
/// i.e. E[min(G, k_max)^nu] for G geometric with continuation probability q.
/// Uses q^0 = 1 at q = 0. Throws std::invalid_argument when nu < 0,
/// q outside [0, 1] or k_max <= 1.
double mu(double nu, double q, int k_max);

/// Normalized FASA parameters. h_idle and h_collision are chosen so the
/// approximate estimate drift vanishes at rho = 1.
struct FasaDesign {
  double eta = 1.0;
  double nu = 2.0;
  int k_max = 20;
  double h_idle = 0.0;
  double h_collision = 0.0;
};

/// eta > 0, nu >= 0, k_max > 1; throws std::invalid_argument otherwise.
FasaDesign make_design(double eta, double nu, int k_max = 20);

/// Slot outcome probabilities under a Poisson(rho) number of transmitters.
struct OfferedLoadPoint {
  double rho = 0.0;
  double q_idle = 1.0;
  double q_success = 0.0;
  double q_collision = 0.0;

  static OfferedLoadPoint at(double rho) noexcept;
};

/// Approximate one-slot drift of the estimate at offered load rho > 0.
double drift_phi(const FasaDesign& design, double rho);

/// Approximate one-slot drift of the estimation error N_hat - N:
/// phi(rho) - (lambda_bar - rho e^-rho).
double drift_psi(const FasaDesign& design, double rho, double lambda_bar);

/// Unique root of psi(., lambda_bar) in (0, 1] for lambda_bar in (0, 1/e].
/// Bisection on a bracket whose lower end is shrunk geometrically until
/// psi < 0; stops when |psi| < 1e-10 or the bracket collapses.
double omega_root(const FasaDesign& design, double lambda_bar);

/// Fixed-step (Kelly framework) drift (a0 - ac) e^-rho + (a1 - ac) rho e^-rho + ac.
double kelly_drift(double a_idle, double a_success, double a_collision, double rho) noexcept;

/// Dense row-major square matrix; only used for the small streak chain.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * dim_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * dim_ + c]; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * dim_, dim_};
  }

  SquareMatrix operator*(const SquareMatrix& rhs) const;
  SquareMatrix power(unsigned exponent) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Streak memory chain K' on {-k_max, ..., k_max} driven by i.i.d. slot
/// outcomes at a fixed offered load. Index 0 of vectors/matrices is state
/// -k_max; use `index_of` / `state_of` to convert.
struct StreakChain {
  double rho = 0.0;
  int k_max = 0;
  SquareMatrix transition;
  std::vector<double> stationary;

  std::size_t size() const noexcept { return 2 * static_cast<std::size_t>(k_max) + 1; }
  std::size_t index_of(int state) const noexcept {
    return static_cast<std::size_t>(state + k_max);
  }
  int state_of(std::size_t index) const noexcept { return static_cast<int>(index) - k_max; }
};

/// Streak update after one slot outcome: 0 idle, 1 success, 2 collision.
int next_streak(int streak, int outcome, int k_max) noexcept;

/// Transition matrix and closed-form stationary distribution.
StreakChain build_streak_chain(double rho, int k_max);

/// Exact T-slot drifts of the virtual chain started at streak k0.
struct VirtualDrifts {
  double backlog = 0.0;   ///< T (lambda_bar - rho e^-rho), closed form
  double estimate = 0.0;  ///< sum of per-slot expected estimate increments
  double error = 0.0;     ///< estimate - backlog
  std::vector<double> per_slot_estimate;
};

VirtualDrifts virtual_drifts(const FasaDesign& design, double rho, double lambda_bar, int k0,
                             int horizon);

/// A labelled fixed-step scheme for drift plots.
struct KellyInstance {
  std::string label;
  double a_idle = 0.0;
  double a_success = 0.0;
  double a_collision = 0.0;
};

/// PB-ALOHA as a Kelly instance: a0 = a1 = lambda_hat - 1, ac = lambda_hat + 1/(e-2).
KellyInstance pb_kelly_instance(double lambda_hat = kInvE);

struct LabelledDesign {
  std::string label;
  FasaDesign design;
};

struct DriftCurveRow {
  std::string scheme;
  double rho = 0.0;
  double drift = 0.0;
};

/// 0.01, 0.02, ..., 6.00 (600 points, computed as i * 0.01).
std::vector<double> default_rho_grid();
std::vector<double> make_rho_grid(double start, double stop, double step);

/// FASA rows use drift_phi, fixed-step rows use kelly_drift. Throws on a
/// non-positive grid point.
std::vector<DriftCurveRow> emit_drift_curves(std::span<const LabelledDesign> designs,
                                             std::span<const KellyInstance> kelly,
                                             std::span<const double> rho_grid);

/// CSV with header `scheme,rho,drift`.
void write_drift_curves_csv(std::ostream& out, std::span<const DriftCurveRow> rows);

}  // namespace fasa::analysis
