#include "qreduce/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "qreduce/projective.hpp"

namespace qreduce {

void SdeConfig::validate() const {
  if (!std::isfinite(sigma) || sigma < 0.0) throw ConfigError("sigma", "must be finite and >= 0");
  if (!std::isfinite(dt) || dt <= 0.0) throw ConfigError("dt", "must be finite and > 0");
  if (!std::isfinite(t_max) || t_max <= 0.0) throw ConfigError("t_max", "must be finite and > 0");
  if (!std::isfinite(collapse_variance_tol) || collapse_variance_tol <= 0.0) {
    throw ConfigError("collapse_variance_tol", "must be finite and > 0");
  }
  if (record_stride < 1) throw ConfigError("record_stride", "must be a positive integer");
  if (t_max / dt > 1e12) throw ConfigError("dt", "t_max / dt exceeds 1e12 steps");
}

std::int64_t SdeConfig::step_count() const {
  return static_cast<std::int64_t>(std::ceil(t_max / dt - 1e-9));
}

void check_stability(const SdeConfig& cfg, const Observable& h) {
  cfg.validate();
  const double guard = cfg.sigma * cfg.sigma * h.norm() * h.norm() * cfg.dt;
  if (!(guard < 0.1)) {
    throw ConfigError("dt", "stability guard sigma^2 ||H||^2 dt = " + std::to_string(guard) +
                                " must stay below 0.1");
  }
}

StateVector unitary_evolve(const Observable& h, const StateVector& psi0, double t) {
  if (psi0.size() != h.dimension()) throw ValidationError("state and observable dimensions differ");
  if (!std::isfinite(t)) throw ValidationError("evolution time must be finite");
  checked_squared_norm(psi0);
  const StateVector coeffs = h.eigenvectors().adjoint() * psi0;
  const Eigen::VectorXcd phases =
      (Complex(0.0, -t) * h.eigenvalues().cast<Complex>()).array().exp().matrix();
  return h.eigenvectors() * phases.cwiseProduct(coeffs);
}

StateVector reduction_step(const Observable& h, const StateVector& psi, const SdeConfig& cfg, double dW) {
  check_stability(cfg, h);
  if (psi.size() != h.dimension()) throw ValidationError("state and observable dimensions differ");
  const StateVector unit = psi / std::sqrt(checked_squared_norm(psi));
  const Matrix& hm = h.matrix();
  const double mean = unit.dot(hm * unit).real();
  const StateVector centred = hm * unit - mean * unit;
  const StateVector centred2 = hm * centred - mean * centred;
  const double s = cfg.sigma;
  StateVector next = unit + (Complex(0.0, -cfg.dt) * centred - (s * s / 8.0 * cfg.dt) * centred2) +
                     (0.5 * s * dW) * centred;
  return next / next.norm();
}

ReductionIntegrator::ReductionIntegrator(const Observable& h, const StateVector& psi0, double sigma, double dt)
    : h_(&h), sigma_(sigma), dt_(dt) {
  if (psi0.size() != h.dimension()) throw ValidationError("state and observable dimensions differ");
  const double n2 = checked_squared_norm(psi0);
  levels_ = h.eigenvalues();
  coeffs_ = h.eigenvectors().adjoint() * psi0 / std::sqrt(n2);
  previous_ = coeffs_;
  refresh();
  previous_moments_ = moments_;
}

void ReductionIntegrator::refresh() {
  double mean = 0.0;
  for (Eigen::Index j = 0; j < levels_.size(); ++j) mean += levels_[j] * std::norm(coeffs_[j]);
  double var = 0.0, third = 0.0;
  for (Eigen::Index j = 0; j < levels_.size(); ++j) {
    const double k = levels_[j] - mean;
    const double p = std::norm(coeffs_[j]);
    var += k * k * p;
    third += k * k * k * p;
  }
  moments_ = {mean, var, third};
}

void ReductionIntegrator::step(double dW) {
  previous_ = coeffs_;
  previous_moments_ = moments_;
  const double mean = moments_.mean;
  const double ito_scale = sigma_ * sigma_ / 8.0 * dt_;
  const double half_s_dw = 0.5 * sigma_ * dW;
  double n2 = 0.0;
  for (Eigen::Index j = 0; j < levels_.size(); ++j) {
    const double k = levels_[j] - mean;
    const Complex factor(1.0 - ito_scale * k * k + half_s_dw * k, -dt_ * k);
    coeffs_[j] *= factor;
    n2 += std::norm(coeffs_[j]);
  }
  coeffs_ /= std::sqrt(n2);
  refresh();
}

void ReductionIntegrator::rollback() {
  coeffs_ = previous_;
  moments_ = previous_moments_;
}

bool ReductionIntegrator::finite() const {
  return coeffs_.allFinite() && std::isfinite(moments_.variance);
}

StateVector ReductionIntegrator::state() const { return h_->eigenvectors() * coeffs_; }

double ReductionIntegrator::dominant_weight(Eigen::Index& space) const {
  std::vector<double> weights(h_->eigenspaces().size(), 0.0);
  for (Eigen::Index j = 0; j < coeffs_.size(); ++j) {
    weights[static_cast<std::size_t>(h_->eigenspace_of_level(j))] += std::norm(coeffs_[j]);
  }
  space = 0;
  for (std::size_t k = 1; k < weights.size(); ++k) {
    if (weights[k] > weights[static_cast<std::size_t>(space)]) space = static_cast<Eigen::Index>(k);
  }
  return weights[static_cast<std::size_t>(space)];
}

namespace {

TrajectoryRecord make_record(double time, const ReductionIntegrator& integ, double wiener_sum) {
  const StateVector psi = integ.state();
  const MomentTriple& m = integ.moments();
  std::optional<double> residual;
  if (psi.size() == 4) residual = quadric_residual(psi);
  return TrajectoryRecord{time, Ray(psi), m.mean, m.variance, m.third, residual, wiener_sum};
}

}  // namespace

Trajectory simulate_trajectory(const Observable& h, const StateVector& psi0, const SdeConfig& cfg,
                               std::uint64_t trajectory_index) {
  check_stability(cfg, h);
  ReductionIntegrator integ(h, psi0, cfg.sigma, cfg.dt);
  std::vector<TrajectoryRecord> records;
  std::int64_t last_recorded = -1;
  const DriveResult run =
      drive(integ, cfg, trajectory_index, [&](std::int64_t k, const ReductionIntegrator& state, double w) {
        if (k % cfg.record_stride == 0) {
          records.push_back(make_record(static_cast<double>(k) * cfg.dt, state, w));
          last_recorded = k;
        }
      });
  const double t_final = static_cast<double>(run.last_step) * cfg.dt;
  if (run.last_step != last_recorded) records.push_back(make_record(t_final, integ, run.wiener_sum));
  if (run.failed) {
    throw IntegrationError("non-finite state after step " + std::to_string(run.last_step),
                           records.back());
  }
  CollapseOutcome outcome{run.collapsed, run.eigenspace, std::nullopt, records.back()};
  if (run.collapsed) outcome.hitting_time = t_final;
  return Trajectory{std::move(records), std::move(outcome)};
}

DriftEstimate variance_drift_estimate(const Observable& h, const StateVector& psi0, const SdeConfig& cfg,
                                      std::int64_t n_traj) {
  if (n_traj < 100) throw ValidationError("variance drift estimate needs at least 100 trajectories");
  check_stability(cfg, h);
  const std::int64_t n = cfg.step_count();
  std::vector<double> sum_dv(static_cast<std::size_t>(n), 0.0);
  std::vector<double> sum_v2(static_cast<std::size_t>(n), 0.0);
  std::int64_t segment = 0;

  for (std::int64_t traj = 0; traj < n_traj; ++traj) {
    ReductionIntegrator integ(h, psi0, cfg.sigma, cfg.dt);
    double prev_v = 0.0;
    const DriveResult run = drive(integ, cfg, static_cast<std::uint64_t>(traj),
                                  [&](std::int64_t k, const ReductionIntegrator& state, double) {
                                    const double v = state.moments().variance;
                                    if (k > 0) sum_dv[static_cast<std::size_t>(k - 1)] += v - prev_v;
                                    if (k < n) sum_v2[static_cast<std::size_t>(k)] += v * v;
                                    prev_v = v;
                                  });
    if (run.failed) throw IntegrationError("non-finite state in drift estimate", TrajectoryRecord{
        static_cast<double>(run.last_step) * cfg.dt, Ray(integ.state()), integ.moments().mean,
        integ.moments().variance, integ.moments().third, std::nullopt, run.wiener_sum});
    // The collapsed step itself is not an increment.
    const std::int64_t used = run.collapsed ? run.last_step : std::min(run.last_step, n);
    if (run.collapsed && run.last_step < n) sum_v2[static_cast<std::size_t>(run.last_step)] -= prev_v * prev_v;
    segment = std::max(segment, used);
  }

  const double s2dt = cfg.sigma * cfg.sigma * cfg.dt;
  const double inv_n = 1.0 / static_cast<double>(n_traj);
  double sxx = 0.0, sxy = 0.0;
  for (std::int64_t k = 0; k < segment; ++k) {
    const double x = -s2dt * sum_v2[static_cast<std::size_t>(k)] * inv_n;
    const double y = sum_dv[static_cast<std::size_t>(k)] * inv_n;
    sxx += x * x;
    sxy += x * y;
  }
  if (segment < 2 || !(sxx > 0.0)) {
    throw InsufficientDataError("no pre-collapse variance increments to regress");
  }
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::int64_t k = 0; k < segment; ++k) {
    const double x = -s2dt * sum_v2[static_cast<std::size_t>(k)] * inv_n;
    const double y = sum_dv[static_cast<std::size_t>(k)] * inv_n;
    rss += (y - slope * x) * (y - slope * x);
  }
  const double se = std::sqrt(rss / static_cast<double>(segment - 1) / sxx);
  return {slope, se, segment};
}

}  // namespace qreduce
