#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <numbers>
#include <random>

#include "qreduce/ensemble.hpp"
#include "qreduce/epr.hpp"

namespace qreduce {
namespace {

Matrix diag(std::initializer_list<double> d) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v[i++] = x;
  return v.cast<Complex>().asDiagonal();
}

StateVector vec(std::initializer_list<Complex> c) {
  return Eigen::Map<const StateVector>(c.begin(), static_cast<Eigen::Index>(c.size()));
}

EnsembleConfig two_level(std::int64_t n, std::uint64_t seed) {
  EnsembleConfig cfg(Scenario{Observable(diag({0.0, 2.0})), vec({std::sqrt(0.3), std::sqrt(0.7)})});
  cfg.n_traj = n;
  cfg.base.dt = 0.01;
  cfg.base.t_max = 60.0;
  cfg.base.seed = seed;
  return cfg;
}

EnsembleConfig singlet(std::int64_t n, std::uint64_t seed) {
  EnsembleConfig cfg(
      Scenario{build_epr_hamiltonian(FilterCoupling::from_list(-3, -1, 1, 3), {}), singlet_state()});
  cfg.n_traj = n;
  cfg.base.dt = 1e-3;
  cfg.base.t_max = 40.0;
  cfg.base.seed = seed;
  return cfg;
}

std::int64_t total(const EnsembleReport& r) {
  std::int64_t s = r.uncollapsed_count + r.failure_count;
  for (const auto& [k, c] : r.outcome_counts) s += c;
  return s;
}

TEST(BornExpected, Examples) {
  const Observable h(diag({0.0, 1.0, 2.0}));
  const auto e = born_expected(h, vec({0.0, Complex(0.0, 3.0), 0.0}));
  EXPECT_EQ(e.at(0), 0.0);
  EXPECT_NEAR(e.at(1), 1.0, 1e-15);
  EXPECT_EQ(e.at(2), 0.0);

  const auto two = born_expected(Observable(diag({0.0, 2.0})), vec({std::sqrt(0.3), std::sqrt(0.7)}));
  EXPECT_NEAR(two.at(0), 0.3, 1e-15);
  EXPECT_NEAR(two.at(1), 0.7, 1e-15);

  // Singlet against the nondegenerate filter Hamiltonian at zero angle:
  // eigenvalues ascending -3 (uu), -1 (ud), 1 (dd), 3 (du).
  const auto s = born_expected(build_epr_hamiltonian(FilterCoupling::from_list(-3, -1, 1, 3), {}), singlet_state());
  EXPECT_NEAR(s.at(0), 0.0, 1e-15);
  EXPECT_NEAR(s.at(1), 0.5, 1e-15);
  EXPECT_NEAR(s.at(2), 0.0, 1e-15);
  EXPECT_NEAR(s.at(3), 0.5, 1e-15);
  const double sum = std::accumulate(s.begin(), s.end(), 0.0, [](double a, const auto& kv) { return a + kv.second; });
  EXPECT_NEAR(sum, 1.0, 1e-12);

  EXPECT_THROW(born_expected(h, StateVector::Zero(3)), DomainError);
}

TEST(EnsembleConfig, Validation) {
  EnsembleConfig cfg = two_level(10, 0);
  cfg.n_traj = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.n_traj = 10;
  cfg.checkpoints = {0.0, 5.0, 2.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.checkpoints = {0.0, 61.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.checkpoints = {0.0, 30.0, 60.0};
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(two_level(1, 0).effective_checkpoints().size(), 11u);
}

TEST(RunEnsemble, SingleEigenvectorTrajectory) {
  EnsembleConfig cfg(Scenario{Observable(diag({0.0, 1.0, 2.0})), vec({0.0, 1.0, 0.0})});
  const EnsembleReport r = run_ensemble(cfg);
  EXPECT_EQ(r.outcome_counts.at(1), 1);
  EXPECT_EQ(r.outcome_counts.at(0), 0);
  EXPECT_EQ(r.uncollapsed_count, 0);
  for (const SeriesPoint& p : r.variance_mean_series) EXPECT_EQ(p.mean, 0.0);
  EXPECT_EQ(total(r), 1);
}

TEST(RunEnsemble, SingletHalfAndHalf) {
  const EnsembleReport r = run_ensemble(singlet(20000, 42));
  EXPECT_EQ(total(r), 20000);
  EXPECT_LT(static_cast<double>(r.uncollapsed_count), 0.01 * 20000);
  const double counted = 20000.0 - static_cast<double>(r.uncollapsed_count);
  for (Eigen::Index k : {1, 3}) {
    const double f = static_cast<double>(r.outcome_counts.at(k)) / counted;
    EXPECT_GE(f, 0.491);
    EXPECT_LE(f, 0.509);
  }
  EXPECT_EQ(r.outcome_counts.at(0) + r.outcome_counts.at(2), 0);
}

TEST(RunEnsemble, TwoLevelBornFrequencies) {
  const EnsembleReport r = run_ensemble(two_level(20000, 7));
  EXPECT_EQ(r.uncollapsed_count, 0);
  const double f = static_cast<double>(r.outcome_counts.at(0)) / 20000.0;
  EXPECT_LT(std::abs(f - 0.3), 3.0 * std::sqrt(0.3 * 0.7 / 20000.0));
  EXPECT_GE(born_test(r).p_value, 0.01);
}

TEST(RunEnsemble, IndependentOfWorkerCount) {
  EnsembleConfig cfg = singlet(300, 11);
  cfg.base.t_max = 10.0;
  cfg.workers = 1;
  const EnsembleRun a = run_ensemble_detailed(cfg);
  for (unsigned w : {2u, 3u, 8u}) {
    cfg.workers = w;
    const EnsembleRun b = run_ensemble_detailed(cfg);
    EXPECT_EQ(a.report.outcome_counts, b.report.outcome_counts);
    EXPECT_EQ(a.report.uncollapsed_count, b.report.uncollapsed_count);
    EXPECT_EQ(a.report.chi_square.statistic, b.report.chi_square.statistic);
    ASSERT_EQ(a.report.energy_mean_series.size(), b.report.energy_mean_series.size());
    for (std::size_t i = 0; i < a.report.energy_mean_series.size(); ++i) {
      EXPECT_EQ(a.report.energy_mean_series[i].mean, b.report.energy_mean_series[i].mean);
      EXPECT_EQ(a.report.energy_mean_series[i].standard_error, b.report.energy_mean_series[i].standard_error);
      EXPECT_EQ(a.report.variance_mean_series[i].mean, b.report.variance_mean_series[i].mean);
    }
    for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
      EXPECT_EQ(a.trajectories[i].final_time, b.trajectories[i].final_time);
    }
  }
}

TEST(RunEnsemble, CollapsedSinglesEndOnProducts) {
  const EnsembleRun run = run_ensemble_detailed(singlet(200, 3));
  for (const TrajectorySummary& t : run.trajectories) {
    ASSERT_TRUE(t.collapsed);
    EXPECT_LT(t.final_quadric_residual, 1e-3);
  }
}

TEST(Martingale, NoNoiseScoresZero) {
  EnsembleConfig cfg = two_level(50, 1);
  cfg.base.sigma = 0.0;
  cfg.base.t_max = 2.0;
  // Equal weights on two levels: the centred flow leaves both weights fixed,
  // so only rounding moves the mean.
  cfg.scenario.initial_state = vec({1.0, 1.0}) / std::sqrt(2.0);
  const EnsembleReport r = run_ensemble(cfg);
  EXPECT_EQ(martingale_test(r).verdict, Verdict::kPass);
  for (const SeriesPoint& s : r.energy_mean_series) EXPECT_NEAR(s.mean, r.initial_energy, 1e-12);
  EXPECT_EQ(variance_decay_test(r).verdict, Verdict::kNotApplicable);
}

TEST(Martingale, EigenvectorScoresZero) {
  EnsembleConfig cfg = two_level(20, 1);
  cfg.scenario.initial_state = vec({0.0, 1.0});
  const EnsembleReport r = run_ensemble(cfg);
  const MartingaleVerdict m = martingale_test(r);
  EXPECT_EQ(m.verdict, Verdict::kPass);
  for (double z : m.z_scores) EXPECT_EQ(z, 0.0);
  const DecayVerdict d = variance_decay_test(r);
  EXPECT_EQ(d.verdict, Verdict::kPass);
  for (double v : d.series) EXPECT_EQ(v, 0.0);
}

TEST(Martingale, SingletPasses) {
  const EnsembleReport r = run_ensemble(singlet(5000, 5));
  EXPECT_EQ(martingale_test(r).verdict, Verdict::kPass);
  const DecayVerdict d = variance_decay_test(r);
  EXPECT_EQ(d.verdict, Verdict::kPass) << d.reason;
  EXPECT_LT(d.series.back(), 0.01 * r.initial_variance);
}

TEST(Martingale, DetectsShiftedMean) {
  EnsembleReport r;
  r.initial_energy = 1.0;
  r.energy_mean_series = {{0.0, 1.0, 0.0}, {1.0, 1.5, 0.1}};
  const MartingaleVerdict m = martingale_test(r);
  EXPECT_EQ(m.verdict, Verdict::kFail);
  EXPECT_NEAR(m.z_scores[1], 5.0, 1e-12);
  r.energy_mean_series = {{0.0, 1.0, 0.0}};
  EXPECT_THROW(martingale_test(r), ValidationError);
  r.energy_mean_series = {{0.0, 1.0, 0.0}, {1.0, 1.1, 0.0}};
  EXPECT_TRUE(std::isinf(martingale_test(r).z_scores[1]));
}

TEST(VarianceDecay, DetectsRiseAndSlowDecay) {
  EnsembleReport r;
  r.sigma = 1.0;
  r.t_max = 100.0;
  r.initial_variance = 1.0;
  r.variance_mean_series = {{0.0, 1.0, 0.0}, {50.0, 1.2, 0.01}, {100.0, 0.001, 0.0}};
  EXPECT_EQ(variance_decay_test(r).verdict, Verdict::kFail);
  r.variance_mean_series = {{0.0, 1.0, 0.0}, {50.0, 0.5, 0.01}, {100.0, 0.02, 0.001}};
  EXPECT_EQ(variance_decay_test(r).verdict, Verdict::kFail);  // sigma^2 V0 t_max = 100 > 50
  r.t_max = 40.0;
  EXPECT_EQ(variance_decay_test(r).verdict, Verdict::kPass);
}

TEST(ChiSquare, Statistic) {
  const ChiSquare exact = chi_square_test({30, 70}, {0.3, 0.7});
  EXPECT_EQ(exact.statistic, 0.0);
  EXPECT_EQ(exact.dof, 1);
  EXPECT_NEAR(exact.p_value, 1.0, 1e-15);
  // (40-50)^2/50 + (60-50)^2/50 = 4; P(chi2_1 > 4) = erfc(sqrt 2).
  const ChiSquare off = chi_square_test({40, 60}, {0.5, 0.5});
  EXPECT_NEAR(off.statistic, 4.0, 1e-12);
  EXPECT_NEAR(off.p_value, std::erfc(std::sqrt(2.0)), 1e-12);
  const ChiSquare impossible = chi_square_test({5, 1}, {1.0, 0.0});
  EXPECT_TRUE(std::isinf(impossible.statistic));
  EXPECT_EQ(impossible.p_value, 0.0);
}

TEST(ChiSquare, CalibratedRejectionRate) {
  // Multinomial samples drawn straight from the Born weights of the singlet
  // at pi/3, bypassing the dynamics.
  const std::vector<double> p{0.125, 0.375, 0.125, 0.375};
  std::mt19937_64 rng(2024);
  std::discrete_distribution<int> pick(p.begin(), p.end());
  int rejections = 0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<std::int64_t> counts(4, 0);
    for (int i = 0; i < 2000; ++i) ++counts[static_cast<std::size_t>(pick(rng))];
    if (chi_square_test(counts, p).p_value < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / reps;
  EXPECT_GE(rate, 0.03);
  EXPECT_LE(rate, 0.07);
}

TEST(EnsembleProperty, CountsConserved) {
  EnsembleConfig cfg = singlet(400, 8);
  cfg.base.t_max = 1.0;  // short horizon leaves some uncollapsed
  const EnsembleReport r = run_ensemble(cfg);
  EXPECT_GT(r.uncollapsed_count, 0);
  EXPECT_EQ(total(r), 400);
  // Born verdict refuses a run with >= 1% uncollapsed.
  EXPECT_EQ(born_test(r).verdict, Verdict::kFail);
}

TEST(EnsembleProperty, FrequencyErrorShrinksAsRootN) {
  // Mean absolute error over independent seeds; for an unbiased estimator it
  // is sqrt(2/pi) sqrt(p(1-p)/n).
  const double p = 0.3;
  std::vector<double> scaled;
  for (std::int64_t n : {500, 2000, 8000}) {
    const int reps = 16;
    double err = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const EnsembleReport r = run_ensemble(two_level(n, 1000 + static_cast<std::uint64_t>(rep)));
      err += std::abs(static_cast<double>(r.outcome_counts.at(0)) / static_cast<double>(n) - p);
    }
    err /= reps;
    scaled.push_back(err * std::sqrt(static_cast<double>(n)));
  }
  const double target = std::sqrt(2.0 / std::numbers::pi) * std::sqrt(p * (1 - p));
  for (double s : scaled) {
    EXPECT_GT(s, 0.5 * target);
    EXPECT_LT(s, 1.6 * target);
  }
}

}  // namespace
}  // namespace qreduce
