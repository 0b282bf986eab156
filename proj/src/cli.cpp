#include "qreduce/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "qreduce/epr.hpp"
#include "qreduce/projective.hpp"

namespace qreduce {

using Json = nlohmann::ordered_json;

namespace {

// Shortest text that reads back to the same double.
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json json_number(double x) {
  if (std::isfinite(x)) return x;
  return num(x);  // JSON has no literal for NaN or infinity
}

bool to_stdout(const std::string& path) { return path.empty() || path == "-"; }

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (to_stdout(path)) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("output.path", "cannot open " + path + " for writing");
  f << text;
  if (!f) throw ConfigError("output.path", "write to " + path + " failed");
}

Json verdict_json(Verdict v) { return to_string(v); }

}  // namespace

RunConfig resolve_config(const CliOptions& opts) {
  RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_run_config(opts.config_path);
  if (opts.seed) cfg.set_seed(*opts.seed);
  if (opts.out) cfg.output.path = *opts.out;
  if (opts.format) {
    if (*opts.format == "csv") {
      cfg.output.format = OutputSpec::Format::kCsv;
    } else if (*opts.format == "json") {
      cfg.output.format = OutputSpec::Format::kJson;
    } else {
      throw ConfigError("--format", "expected csv or json");
    }
  }
  if (opts.quick) cfg.make_quick();
  cfg.validate();
  return cfg;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream s;
  const Eigen::Index n = traj.records.empty() ? 0 : traj.records.front().ray.dimension();
  s << "t";
  for (Eigen::Index i = 1; i <= n; ++i) s << ",re_z" << i << ",im_z" << i;
  s << ",energy_mean,variance,third_moment,quadric_residual\n";
  for (const TrajectoryRecord& r : traj.records) {
    s << num(r.time);
    const StateVector& z = r.ray.representative();
    for (Eigen::Index i = 0; i < n; ++i) s << ',' << num(z[i].real()) << ',' << num(z[i].imag());
    s << ',' << num(r.energy_mean) << ',' << num(r.variance) << ',' << num(r.third_moment) << ',';
    if (r.quadric_residual) s << num(*r.quadric_residual);
    s << '\n';
  }
  return s.str();
}

std::string trajectory_json(const Trajectory& traj, const RunConfig& cfg) {
  Json root;
  root["artifact"] = "qreduce";
  root["version"] = kArtifactVersion;
  root["seed"] = cfg.ensemble.seed;
  root["config"] = Json::parse(serialize_run_config(cfg));
  Json outcome;
  outcome["collapsed"] = traj.outcome.collapsed;
  outcome["eigenspace"] = traj.outcome.eigenspace_index ? Json(*traj.outcome.eigenspace_index) : Json(nullptr);
  outcome["hitting_time"] = traj.outcome.hitting_time ? Json(*traj.outcome.hitting_time) : Json(nullptr);
  root["outcome"] = outcome;
  Json records = Json::array();
  for (const TrajectoryRecord& r : traj.records) {
    Json amps = Json::array();
    const StateVector& z = r.ray.representative();
    for (Eigen::Index i = 0; i < z.size(); ++i) amps.push_back({z[i].real(), z[i].imag()});
    records.push_back({{"t", r.time},
                       {"amplitudes", amps},
                       {"energy_mean", r.energy_mean},
                       {"variance", r.variance},
                       {"third_moment", r.third_moment},
                       {"quadric_residual", r.quadric_residual ? Json(*r.quadric_residual) : Json(nullptr)}});
  }
  root["records"] = records;
  return root.dump(2) + "\n";
}

namespace {

Json series_json(const std::vector<SeriesPoint>& series) {
  Json a = Json::array();
  for (const SeriesPoint& p : series) a.push_back({{"t", p.time}, {"mean", p.mean}, {"stderr", p.standard_error}});
  return a;
}

// Joint and conditional outcome frequencies over the rotated product basis.
// Needs every product state in its own eigenspace; otherwise the outcomes
// cannot be told apart and the section reports resolved = false.
Json epr_section(const EnsembleRun& run, const RunConfig& cfg, const Scenario& scenario) {
  const ScenarioSpec& sc = cfg.scenario;
  const FilterOrientation o{sc.theta, sc.rotated_side};
  const auto& spaces = scenario.hamiltonian.eigenspaces();
  // (rotated particle label, other particle label) in table order.
  const std::array<std::pair<int, int>, 4> labels{{{0, 1}, {0, 0}, {1, 1}, {1, 0}}};
  const std::array<const char*, 4> names{"rup_down", "rup_up", "rdown_down", "rdown_up"};
  std::array<std::optional<Eigen::Index>, 4> space_of{};
  bool resolved = true;
  for (std::size_t n = 0; n < 4; ++n) {
    const auto [r, other] = labels[n];
    const int i = o.side == RotatedSide::kFirst ? r : other;
    const int j = o.side == RotatedSide::kFirst ? other : r;
    const Eigen::Vector4cd v = epr_product_state(o, i, j);
    for (std::size_t k = 0; k < spaces.size(); ++k) {
      if (spaces[k].dimension() == 1 && (spaces[k].basis.adjoint() * v).squaredNorm() > 0.5) {
        space_of[n] = static_cast<Eigen::Index>(k);
      }
    }
    if (!space_of[n]) resolved = false;
  }

  Json e;
  e["theta"] = sc.theta;
  e["rotated_side"] = sc.rotated_side == RotatedSide::kFirst ? "first" : "second";
  e["resolved"] = resolved;
  const bool singlet = !sc.initial_state;
  if (singlet) {
    const BornTable t = epr_born_joint(sc.theta);
    e["joint_expected"] = {{names[0], t.rup_down}, {names[1], t.rup_up}, {names[2], t.rdown_down},
                           {names[3], t.rdown_up}};
    e["conditional_expected"] = epr_born_conditional(sc.theta);
  }
  if (!resolved) return e;
  const EnsembleReport& r = run.report;
  const std::int64_t counted = r.n_traj - r.failure_count - r.uncollapsed_count;
  std::array<std::int64_t, 4> counts{};
  Json jc, jf;
  for (std::size_t n = 0; n < 4; ++n) {
    counts[n] = r.outcome_counts.at(*space_of[n]);
    jc[names[n]] = counts[n];
    jf[names[n]] = counted > 0 ? static_cast<double>(counts[n]) / static_cast<double>(counted) : 0.0;
  }
  e["joint_counts"] = jc;
  e["joint_frequencies"] = jf;
  // Other particle down: rup_down + rdown_down.
  const std::int64_t given = counts[0] + counts[2];
  e["conditioned_count"] = given;
  e["conditional_frequency"] =
      given > 0 ? Json(static_cast<double>(counts[0]) / static_cast<double>(given)) : Json(nullptr);
  return e;
}

}  // namespace

std::string ensemble_json(const EnsembleRun& run, const RunConfig& cfg) {
  const EnsembleReport& r = run.report;
  Json root;
  root["artifact"] = "qreduce";
  root["version"] = kArtifactVersion;
  root["seed"] = r.seed;
  root["config"] = Json::parse(serialize_run_config(cfg));

  Json rep;
  rep["n_traj"] = r.n_traj;
  rep["seed"] = r.seed;
  rep["sigma"] = r.sigma;
  rep["t_max"] = r.t_max;
  rep["initial_energy"] = r.initial_energy;
  rep["initial_variance"] = r.initial_variance;
  rep["eigenvalues"] = r.eigenvalues;
  Json counts = Json::object(), born = Json::object();
  for (const auto& [k, c] : r.outcome_counts) counts[std::to_string(k)] = c;
  for (const auto& [k, p] : r.expected_born) born[std::to_string(k)] = p;
  rep["outcome_counts"] = counts;
  rep["expected_born"] = born;
  rep["chi_square"] = {{"statistic", json_number(r.chi_square.statistic)},
                       {"dof", r.chi_square.dof},
                       {"p_value", r.chi_square.p_value}};
  rep["energy_mean_series"] = series_json(r.energy_mean_series);
  rep["variance_mean_series"] = series_json(r.variance_mean_series);
  rep["uncollapsed_count"] = r.uncollapsed_count;
  rep["failure_count"] = r.failure_count;
  root["report"] = rep;

  const MartingaleVerdict m = martingale_test(r);
  const DecayVerdict d = variance_decay_test(r);
  const double alpha = 0.01;
  const BornVerdict b = born_test(r, alpha);
  Json z = Json::array();
  for (double v : m.z_scores) z.push_back(json_number(v));
  root["verdicts"] = {
      {"martingale", {{"verdict", verdict_json(m.verdict)}, {"z_scores", z}, {"z_limit", 4.0}}},
      {"variance_decay", {{"verdict", verdict_json(d.verdict)}, {"reason", d.reason}}},
      {"born", {{"verdict", verdict_json(b.verdict)},
                {"p_value", b.p_value},
                {"alpha", alpha},
                {"uncollapsed_fraction", b.uncollapsed_fraction}}}};

  if (cfg.scenario.type == ScenarioSpec::Type::kEpr) {
    root["epr"] = epr_section(run, cfg, cfg.build_scenario());
  }
  return root.dump(2) + "\n";
}

int cmd_simulate(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = resolve_config(opts);
    const Scenario s = cfg.build_scenario();
    const Trajectory traj = simulate_trajectory(s.hamiltonian, s.initial_state, cfg.sde, 0);
    const std::string text =
        cfg.output.format == OutputSpec::Format::kCsv ? trajectory_csv(traj) : trajectory_json(traj, cfg);
    write_output(cfg.output.path, text, out);
    if (!traj.outcome.collapsed) {
      err << "no collapse by t_max = " << num(cfg.sde.t_max) << "\n";
      return exit_code::kNoCollapse;
    }
    return exit_code::kOk;
  } catch (const IntegrationError& e) {
    err << "integration failure: " << e.what() << "\n";
    return exit_code::kIntegrationFailure;
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return exit_code::kValidation;
  } catch (const std::domain_error& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return exit_code::kValidation;
  }
}

int cmd_ensemble(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = resolve_config(opts);
    const EnsembleRun run = run_ensemble_detailed(cfg.ensemble_config(opts.workers));
    write_output(cfg.output.path, ensemble_json(run, cfg), out);
    err << "wall_clock " << num(run.report.wall_clock) << " s\n";
    const bool pass = martingale_test(run.report).verdict != Verdict::kFail &&
                      variance_decay_test(run.report).verdict != Verdict::kFail &&
                      born_test(run.report, 0.01).verdict == Verdict::kPass;
    if (!pass) {
      err << "statistical verdict failed\n";
      return exit_code::kCheckFailed;
    }
    return exit_code::kOk;
  } catch (const EnsembleFailure& e) {
    err << "ensemble failure: " << e.what() << "\n";
    return exit_code::kIntegrationFailure;
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return exit_code::kValidation;
  } catch (const std::domain_error& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return exit_code::kValidation;
  }
}

int cmd_geometry_selftest(std::ostream& out) {
  const std::vector<GeometryCheck> checks = geometry_selftest();
  std::size_t width = 5;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  bool all = true;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS  " : "FAIL  ") << c.name << std::string(width - c.name.size() + 2, ' ') << c.detail
        << "\n";
    all = all && c.passed;
  }
  out << (all ? "all " : "some ") << "checks " << (all ? "passed" : "FAILED") << " (" << checks.size()
      << " total)\n";
  return all ? exit_code::kOk : exit_code::kCheckFailed;
}

int cmd_predict(double theta, std::ostream& out, std::ostream& err) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    err << "theta must lie in [0, pi], got " << num(theta) << "\n";
    return exit_code::kValidation;
  }
  const BornTable t = epr_born_joint(theta);
  Json root;
  root["theta"] = theta;
  root["joint"] = {{"rup_down", t.rup_down}, {"rup_up", t.rup_up}, {"rdown_down", t.rdown_down},
                   {"rdown_up", t.rdown_up}};
  root["conditional"] = epr_born_conditional(theta);
  out << root.dump(2) << "\n";
  return exit_code::kOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-driven stochastic state reduction simulator"};
  app.require_subcommand(1);
  CliOptions opts;
  std::uint64_t seed = 0;
  std::string out_path, format;
  double theta = 0.0;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "run file (JSON)");
    sub->add_option("--seed", seed, "RNG seed, overrides ensemble.seed");
    sub->add_option("--out", out_path, "output path, '-' for standard output");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--quick", opts.quick, "divide n_traj and t_max by 10");
    sub->add_option("--workers", opts.workers, "worker threads, 0 = all cores");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "integrate one trajectory");
  add_run_flags(simulate);
  CLI::App* ensemble = app.add_subcommand("ensemble", "run an ensemble and its statistical tests");
  add_run_flags(ensemble);
  CLI::App* selftest = app.add_subcommand("geometry-selftest", "exact projective-geometry checks");
  CLI::App* predict = app.add_subcommand("predict", "Born predictions for the rotated-filter experiment");
  predict->add_option("theta,--theta", theta, "analyser angle in radians")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::kOk : exit_code::kValidation;
  }
  for (CLI::App* sub : {simulate, ensemble}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--out")) opts.out = out_path;
    if (sub->count("--format")) opts.format = format;
  }
  if (simulate->parsed()) return cmd_simulate(opts, out, err);
  if (ensemble->parsed()) return cmd_ensemble(opts, out, err);
  if (selftest->parsed()) return cmd_geometry_selftest(out);
  return cmd_predict(theta, out, err);
}

}  // namespace qreduce
