#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qreduce/dynamics.hpp"
#include "qreduce/hilbert.hpp"

namespace qreduce {

struct Scenario {
  Observable hamiltonian;
  StateVector initial_state;
};

struct EnsembleConfig {
  explicit EnsembleConfig(Scenario s) : scenario(std::move(s)) {}

  Scenario scenario;
  std::int64_t n_traj = 1;
  SdeConfig base;
  /// Sorted times in [0, t_max]; empty means 11 evenly spaced points.
  std::vector<double> checkpoints;
  /// Worker threads; 0 picks the hardware concurrency. Results do not
  /// depend on this value.
  unsigned workers = 0;

  void validate() const;
  std::vector<double> effective_checkpoints() const;
};

struct SeriesPoint {
  double time = 0.0;
  double mean = 0.0;
  double standard_error = 0.0;
};

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

struct EnsembleReport {
  std::int64_t n_traj = 0;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  double t_max = 0.0;
  double initial_energy = 0.0;
  double initial_variance = 0.0;
  std::vector<double> eigenvalues;                   // per eigenspace
  std::map<Eigen::Index, std::int64_t> outcome_counts;
  std::map<Eigen::Index, double> expected_born;
  ChiSquare chi_square;
  std::vector<SeriesPoint> energy_mean_series;
  std::vector<SeriesPoint> variance_mean_series;
  std::int64_t uncollapsed_count = 0;
  std::int64_t failure_count = 0;
  double wall_clock = 0.0;  // seconds; not part of the deterministic output
};

struct TrajectorySummary {
  bool failed = false;
  bool collapsed = false;
  std::optional<Eigen::Index> eigenspace;
  double final_time = 0.0;
  double final_quadric_residual = 0.0;  // NaN unless the state is 4-dimensional
  MomentTriple final_moments;
  std::vector<double> energy_at;    // per checkpoint
  std::vector<double> variance_at;  // per checkpoint
};

struct EnsembleRun {
  EnsembleReport report;
  std::vector<TrajectorySummary> trajectories;
};

/// Raised when more than 1% of trajectories fail to integrate.
class EnsembleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ||P_k psi0||^2 / ||psi0||^2 per eigenspace k.
std::map<Eigen::Index, double> born_expected(const Observable& h, const StateVector& psi0);

EnsembleRun run_ensemble_detailed(const EnsembleConfig& cfg);
EnsembleReport run_ensemble(const EnsembleConfig& cfg);

/// Pearson chi-square of counts against probabilities. Categories with
/// probability <= 1e-12 are dropped; any count landing in one makes the
/// statistic infinite.
ChiSquare chi_square_test(const std::vector<std::int64_t>& counts, const std::vector<double>& probabilities);

enum class Verdict { kPass, kFail, kNotApplicable };
const char* to_string(Verdict v);

struct MartingaleVerdict {
  Verdict verdict = Verdict::kFail;
  std::vector<double> z_scores;  // per checkpoint
};

/// z = (mean <H>_t - <H>_0) / stderr at each checkpoint; passes iff all
/// |z| < z_limit. A checkpoint with zero spread scores 0 when the mean is
/// unchanged to 1e-12 relative and infinity otherwise.
MartingaleVerdict martingale_test(const EnsembleReport& report, double z_limit = 4.0);

struct DecayVerdict {
  Verdict verdict = Verdict::kFail;
  std::vector<double> series;  // mean V per checkpoint
  std::string reason;
};

/// Mean V non-increasing between checkpoints at the 4-stderr level, and
/// final mean V < 1% of V0 whenever sigma^2 V0 t_max > 50.
DecayVerdict variance_decay_test(const EnsembleReport& report);

struct BornVerdict {
  Verdict verdict = Verdict::kFail;
  double p_value = 0.0;
  double uncollapsed_fraction = 0.0;
};

/// Chi-square p-value >= alpha and fewer than 1% uncollapsed trajectories.
BornVerdict born_test(const EnsembleReport& report, double alpha = 0.01);

}  // namespace qreduce
