#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qreduce/hilbert.hpp"
#include "qreduce/rng.hpp"

namespace qreduce {

/// Integration settings for the reduction SDE (hbar = 1; time in 1/energy).
struct SdeConfig {
  double sigma = 1.0;                   // noise strength, energy^-1 time^-1/2
  double dt = 1e-3;
  double t_max = 10.0;
  double collapse_variance_tol = 1e-8;  // absolute, energy^2
  std::uint64_t seed = 0;
  std::int64_t record_stride = 1;

  /// Range checks on every field; throws ConfigError naming the field.
  void validate() const;
  /// Number of whole steps covering [0, t_max].
  std::int64_t step_count() const;

  friend bool operator==(const SdeConfig&, const SdeConfig&) = default;
};

/// Stability guard sigma^2 ||H||^2 dt < 0.1, plus `cfg.validate()`.
void check_stability(const SdeConfig& cfg, const Observable& h);

struct TrajectoryRecord {
  double time = 0.0;
  Ray ray;
  double energy_mean = 0.0;
  double variance = 0.0;
  double third_moment = 0.0;
  std::optional<double> quadric_residual;  // only for 4-dimensional states
  double wiener_increment_sum = 0.0;
};

struct CollapseOutcome {
  bool collapsed = false;
  std::optional<Eigen::Index> eigenspace_index;
  std::optional<double> hitting_time;
  TrajectoryRecord final_record;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  CollapseOutcome outcome;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, TrajectoryRecord last_valid)
      : std::runtime_error(what), last_valid_(std::move(last_valid)) {}
  const TrajectoryRecord& last_valid_record() const { return last_valid_; }

 private:
  TrajectoryRecord last_valid_;
};

/// Weight an eigenspace must carry, beside a small variance, to count as
/// the collapse target.
inline constexpr double kCollapseDominance = 1.0 - 1e-6;

/// exp(-iHt) psi0 through the spectral decomposition.
StateVector unitary_evolve(const Observable& h, const StateVector& psi0, double t);

/// One Euler-Maruyama step of the ambient lift
///   psi += [-i(H - <H>) - sigma^2/8 (H - <H>)^2] psi dt + sigma/2 (H - <H>) psi dW
/// followed by renormalisation. The input is normalised first.
StateVector reduction_step(const Observable& h, const StateVector& psi, const SdeConfig& cfg, double dW);

/// Stepper working in the eigenbasis of H, where the lift is diagonal.
/// Equivalent to repeated reduction_step up to rounding.
class ReductionIntegrator {
 public:
  ReductionIntegrator(const Observable& h, const StateVector& psi0, double sigma, double dt);

  void step(double dW);
  /// Restore the state held before the last step.
  void rollback();

  const MomentTriple& moments() const { return moments_; }
  bool finite() const;
  /// Unit-norm state in the original basis.
  StateVector state() const;
  /// Largest eigenspace weight; its index is written to `space`.
  double dominant_weight(Eigen::Index& space) const;

 private:
  using Levels = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDimension, 1>;
  using Coeffs = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, kMaxDimension, 1>;

  void refresh();

  const Observable* h_;
  Levels levels_;
  Coeffs coeffs_;
  Coeffs previous_;
  MomentTriple moments_;
  MomentTriple previous_moments_;
  double sigma_;
  double dt_;
};

struct DriveResult {
  bool collapsed = false;
  bool failed = false;
  std::optional<Eigen::Index> eigenspace;
  std::int64_t last_step = 0;
  double wiener_sum = 0.0;
};

/// Runs the integrator along the grid k*dt, k = 0..step_count. `visit(k,
/// integrator, wiener_sum)` sees every grid state before the collapse test.
/// Stops at collapse, at t_max, or at the first non-finite state (which is
/// rolled back, with `failed` set).
template <typename Visitor>
DriveResult drive(ReductionIntegrator& integ, const SdeConfig& cfg, std::uint64_t stream, Visitor&& visit) {
  DriveResult out;
  const std::int64_t n = cfg.step_count();
  const double sqrt_dt = std::sqrt(cfg.dt);
  for (std::int64_t k = 0;; ++k) {
    out.last_step = k;
    visit(k, integ, out.wiener_sum);
    if (integ.moments().variance < cfg.collapse_variance_tol) {
      Eigen::Index space = 0;
      if (integ.dominant_weight(space) > kCollapseDominance) {
        out.collapsed = true;
        out.eigenspace = space;
        return out;
      }
    }
    if (k == n) return out;
    const double dw = sqrt_dt * gaussian_at(cfg.seed, stream, static_cast<std::uint64_t>(k));
    integ.step(dw);
    if (!integ.finite()) {
      integ.rollback();
      out.failed = true;
      return out;
    }
    out.wiener_sum += dw;
  }
}

/// Integrates one trajectory (stream `trajectory_index` of the seed),
/// recording every `record_stride` steps and always the final state.
Trajectory simulate_trajectory(const Observable& h, const StateVector& psi0, const SdeConfig& cfg,
                               std::uint64_t trajectory_index = 0);

struct DriftEstimate {
  double slope = 0.0;
  double standard_error = 0.0;
  std::int64_t steps_used = 0;
};

/// Regresses the ensemble-mean one-step variance increment on
/// -sigma^2 E[V^2] dt over the pre-collapse segment. Slope 1 means the
/// discrete variance process carries the drift -sigma^2 V^2.
DriftEstimate variance_drift_estimate(const Observable& h, const StateVector& psi0, const SdeConfig& cfg,
                                      std::int64_t n_traj);

}  // namespace qreduce
