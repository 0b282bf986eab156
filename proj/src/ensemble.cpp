#include "qreduce/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

#include "qreduce/projective.hpp"

namespace qreduce {

namespace {

class KahanSum {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace

void EnsembleConfig::validate() const {
  if (n_traj < 1) throw ConfigError("n_traj", "must be a positive integer");
  check_stability(base, scenario.hamiltonian);
  if (scenario.initial_state.size() != scenario.hamiltonian.dimension()) {
    throw ConfigError("initial_state", "dimension does not match the Hamiltonian");
  }
  checked_squared_norm(scenario.initial_state);
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const double t = checkpoints[i];
    if (!(t >= 0.0 && t <= base.t_max)) throw ConfigError("checkpoints", "times must lie in [0, t_max]");
    if (i > 0 && !(t > checkpoints[i - 1])) throw ConfigError("checkpoints", "times must be strictly increasing");
  }
}

std::vector<double> EnsembleConfig::effective_checkpoints() const {
  if (!checkpoints.empty()) return checkpoints;
  std::vector<double> out(11);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = base.t_max * static_cast<double>(i) / 10.0;
  return out;
}

std::map<Eigen::Index, double> born_expected(const Observable& h, const StateVector& psi0) {
  const std::vector<double> w = eigenspace_weights(h, psi0);
  std::map<Eigen::Index, double> out;
  for (std::size_t k = 0; k < w.size(); ++k) out[static_cast<Eigen::Index>(k)] = w[k];
  return out;
}

namespace {

TrajectorySummary run_one(const EnsembleConfig& cfg, const std::vector<std::int64_t>& checkpoint_steps,
                          std::uint64_t index) {
  const Observable& h = cfg.scenario.hamiltonian;
  ReductionIntegrator integ(h, cfg.scenario.initial_state, cfg.base.sigma, cfg.base.dt);
  TrajectorySummary out;
  out.energy_at.reserve(checkpoint_steps.size());
  out.variance_at.reserve(checkpoint_steps.size());
  std::size_t next = 0;
  const DriveResult run = drive(integ, cfg.base, index, [&](std::int64_t k, const ReductionIntegrator& s, double) {
    while (next < checkpoint_steps.size() && checkpoint_steps[next] == k) {
      out.energy_at.push_back(s.moments().mean);
      out.variance_at.push_back(s.moments().variance);
      ++next;
    }
  });
  out.failed = run.failed;
  out.collapsed = run.collapsed;
  out.eigenspace = run.eigenspace;
  out.final_time = static_cast<double>(run.last_step) * cfg.base.dt;
  out.final_moments = integ.moments();
  // A collapsed state is frozen for the remaining checkpoints.
  while (next < checkpoint_steps.size()) {
    out.energy_at.push_back(out.final_moments.mean);
    out.variance_at.push_back(out.final_moments.variance);
    ++next;
  }
  const StateVector psi = integ.state();
  out.final_quadric_residual =
      psi.size() == 4 ? quadric_residual(psi) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace

EnsembleRun run_ensemble_detailed(const EnsembleConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Observable& h = cfg.scenario.hamiltonian;
  const std::vector<double> times = cfg.effective_checkpoints();
  std::vector<std::int64_t> steps(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    steps[i] = std::min(cfg.base.step_count(), static_cast<std::int64_t>(std::llround(times[i] / cfg.base.dt)));
  }

  const auto n = static_cast<std::size_t>(cfg.n_traj);
  std::vector<TrajectorySummary> summaries(n);
  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

  std::atomic<std::size_t> cursor{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) {
      try {
        summaries[i] = run_one(cfg, steps, static_cast<std::uint64_t>(i));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  // Ordered reduction: identical for any worker count.
  EnsembleRun run;
  EnsembleReport& r = run.report;
  r.n_traj = cfg.n_traj;
  r.seed = cfg.base.seed;
  r.sigma = cfg.base.sigma;
  r.t_max = cfg.base.t_max;
  const MomentTriple m0 = moments(h, cfg.scenario.initial_state);
  r.initial_energy = m0.mean;
  r.initial_variance = m0.variance;
  for (const Eigenspace& s : h.eigenspaces()) r.eigenvalues.push_back(s.eigenvalue);
  r.expected_born = born_expected(h, cfg.scenario.initial_state);
  for (const auto& [k, p] : r.expected_born) r.outcome_counts[k] = 0;

  std::vector<KahanSum> e_sum(times.size()), e_sq(times.size()), v_sum(times.size()), v_sq(times.size());
  std::int64_t ok = 0;
  for (const TrajectorySummary& s : summaries) {
    if (s.failed) {
      ++r.failure_count;
      continue;
    }
    ++ok;
    if (s.collapsed) {
      ++r.outcome_counts[*s.eigenspace];
    } else {
      ++r.uncollapsed_count;
    }
    for (std::size_t c = 0; c < times.size(); ++c) {
      e_sum[c].add(s.energy_at[c]);
      e_sq[c].add(s.energy_at[c] * s.energy_at[c]);
      v_sum[c].add(s.variance_at[c]);
      v_sq[c].add(s.variance_at[c] * s.variance_at[c]);
    }
  }
  if (static_cast<double>(r.failure_count) > 0.01 * static_cast<double>(cfg.n_traj)) {
    throw EnsembleFailure(std::to_string(r.failure_count) + " of " + std::to_string(cfg.n_traj) +
                          " trajectories failed to integrate");
  }

  auto series_point = [ok](double t, const KahanSum& sum, const KahanSum& sq) {
    SeriesPoint p{t, 0.0, 0.0};
    if (ok == 0) return p;
    const double m = static_cast<double>(ok);
    p.mean = sum.value() / m;
    if (ok > 1) {
      const double var = std::max(0.0, (sq.value() - m * p.mean * p.mean) / (m - 1.0));
      p.standard_error = std::sqrt(var / m);
    }
    return p;
  };
  for (std::size_t c = 0; c < times.size(); ++c) {
    r.energy_mean_series.push_back(series_point(times[c], e_sum[c], e_sq[c]));
    r.variance_mean_series.push_back(series_point(times[c], v_sum[c], v_sq[c]));
  }

  std::vector<std::int64_t> counts;
  std::vector<double> probs;
  for (const auto& [k, p] : r.expected_born) {
    counts.push_back(r.outcome_counts[k]);
    probs.push_back(p);
  }
  r.chi_square = chi_square_test(counts, probs);
  r.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  run.trajectories = std::move(summaries);
  return run;
}

EnsembleReport run_ensemble(const EnsembleConfig& cfg) { return run_ensemble_detailed(cfg).report; }

ChiSquare chi_square_test(const std::vector<std::int64_t>& counts, const std::vector<double>& probabilities) {
  if (counts.size() != probabilities.size()) throw ValidationError("counts and probabilities differ in length");
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  ChiSquare out;
  if (total == 0) return out;
  int categories = 0;
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (probabilities[i] <= 1e-12) {
      if (counts[i] > 0) stat = std::numeric_limits<double>::infinity();
      continue;
    }
    ++categories;
    const double expected = static_cast<double>(total) * probabilities[i];
    const double d = static_cast<double>(counts[i]) - expected;
    stat += d * d / expected;
  }
  out.statistic = stat;
  out.dof = std::max(0, categories - 1);
  if (std::isinf(stat)) {
    out.p_value = 0.0;
  } else if (out.dof == 0) {
    out.p_value = 1.0;
  } else {
    boost::math::chi_squared dist(out.dof);
    out.p_value = boost::math::cdf(boost::math::complement(dist, stat));
  }
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kNotApplicable: return "not_applicable";
  }
  return "fail";
}

MartingaleVerdict martingale_test(const EnsembleReport& report, double z_limit) {
  if (report.energy_mean_series.size() < 2) throw ValidationError("martingale test needs >= 2 checkpoints");
  MartingaleVerdict out{Verdict::kPass, {}};
  const double e0 = report.initial_energy;
  for (const SeriesPoint& p : report.energy_mean_series) {
    const double diff = p.mean - e0;
    double z = 0.0;
    if (p.standard_error > 0.0) {
      z = diff / p.standard_error;
    } else if (std::abs(diff) > 1e-12 * std::max(1.0, std::abs(e0))) {
      z = std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    out.z_scores.push_back(z);
    if (!(std::abs(z) < z_limit)) out.verdict = Verdict::kFail;
  }
  return out;
}

DecayVerdict variance_decay_test(const EnsembleReport& report) {
  const auto& s = report.variance_mean_series;
  if (s.size() < 2) throw ValidationError("variance decay test needs >= 2 checkpoints");
  DecayVerdict out;
  for (const SeriesPoint& p : s) out.series.push_back(p.mean);
  if (report.sigma == 0.0) {
    out.verdict = Verdict::kNotApplicable;
    out.reason = "sigma = 0: unitary flow conserves V";
    return out;
  }
  const double v0 = report.initial_variance;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double rise = s[i].mean - s[i - 1].mean;
    const double band = 4.0 * std::hypot(s[i].standard_error, s[i - 1].standard_error);
    if (rise > band + 1e-12 * std::max(v0, 1e-300)) {
      out.verdict = Verdict::kFail;
      out.reason = "mean V rises between t = " + std::to_string(s[i - 1].time) + " and t = " +
                   std::to_string(s[i].time);
      return out;
    }
  }
  if (v0 > 0.0 && report.sigma * report.sigma * v0 * report.t_max > 50.0) {
    if (!(s.back().mean < 0.01 * v0)) {
      out.verdict = Verdict::kFail;
      out.reason = "final mean V is not below 1% of V0";
      return out;
    }
  }
  out.verdict = Verdict::kPass;
  out.reason = "mean V non-increasing";
  return out;
}

BornVerdict born_test(const EnsembleReport& report, double alpha) {
  BornVerdict out;
  out.p_value = report.chi_square.p_value;
  const std::int64_t ok = report.n_traj - report.failure_count;
  out.uncollapsed_fraction = ok > 0 ? static_cast<double>(report.uncollapsed_count) / static_cast<double>(ok) : 1.0;
  out.verdict = (out.p_value >= alpha && out.uncollapsed_fraction < 0.01) ? Verdict::kPass : Verdict::kFail;
  return out;
}

}  // namespace qreduce
