#include "qreduce/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace qreduce {

using Json = nlohmann::ordered_json;

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

void reject_unknown(const Json& j, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

double read_real(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

std::int64_t read_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    throw ConfigError(path, "integer out of range");
  }
  return j.get<std::int64_t>();
}

std::uint64_t read_u64(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected a non-negative integer");
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const auto v = j.get<std::int64_t>();
  if (v < 0) throw ConfigError(path, "expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::vector<double> read_reals(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_real(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<double>> read_rows(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_reals(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

ComplexVectorSpec read_vector_spec(const Json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"re", "im"});
  if (!j.contains("re")) throw ConfigError(join(path, "re"), "missing");
  ComplexVectorSpec out;
  out.re = read_reals(j["re"], join(path, "re"));
  out.im = j.contains("im") ? read_reals(j["im"], join(path, "im")) : std::vector<double>(out.re.size(), 0.0);
  return out;
}

ComplexMatrixSpec read_matrix_spec(const Json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"re", "im"});
  if (!j.contains("re")) throw ConfigError(join(path, "re"), "missing");
  ComplexMatrixSpec out;
  out.re = read_rows(j["re"], join(path, "re"));
  if (j.contains("im")) {
    out.im = read_rows(j["im"], join(path, "im"));
  } else {
    for (const auto& row : out.re) out.im.emplace_back(row.size(), 0.0);
  }
  return out;
}

StateVector to_state(const ComplexVectorSpec& s) {
  StateVector v(static_cast<Eigen::Index>(s.re.size()));
  for (std::size_t i = 0; i < s.re.size(); ++i) v[static_cast<Eigen::Index>(i)] = Complex(s.re[i], s.im[i]);
  return v;
}

Matrix to_matrix(const ComplexMatrixSpec& s) {
  const auto n = static_cast<Eigen::Index>(s.re.size());
  Matrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      m(r, c) = Complex(s.re[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)],
                        s.im[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
    }
  }
  return m;
}

void check_vector_spec(const ComplexVectorSpec& s, const std::string& path) {
  if (s.re.empty()) throw ConfigError(join(path, "re"), "must not be empty");
  if (s.im.size() != s.re.size()) throw ConfigError(join(path, "im"), "length differs from re");
  double n2 = 0.0;
  for (std::size_t i = 0; i < s.re.size(); ++i) n2 += s.re[i] * s.re[i] + s.im[i] * s.im[i];
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw ConfigError(path, "state must be nonzero and finite");
}

void check_matrix_spec(const ComplexMatrixSpec& s, const std::string& path) {
  const std::size_t n = s.re.size();
  if (n == 0) throw ConfigError(join(path, "re"), "must not be empty");
  if (n > static_cast<std::size_t>(kMaxDimension)) throw ConfigError(path, "dimension exceeds 64");
  if (s.im.size() != n) throw ConfigError(join(path, "im"), "row count differs from re");
  for (std::size_t i = 0; i < n; ++i) {
    if (s.re[i].size() != n) throw ConfigError(join(path, "re"), "matrix must be square");
    if (s.im[i].size() != n) throw ConfigError(join(path, "im"), "matrix must be square");
  }
}

const char* side_name(RotatedSide s) { return s == RotatedSide::kFirst ? "first" : "second"; }

}  // namespace

void RunConfig::validate() const {
  const std::string sc = "scenario";
  if (scenario.type == ScenarioSpec::Type::kEpr) {
    if (scenario.hamiltonian) throw ConfigError("scenario.hamiltonian", "only allowed for custom scenarios");
    for (double l : scenario.lambda) {
      if (!std::isfinite(l)) throw ConfigError("scenario.lambda", "couplings must be finite");
    }
    if (!(scenario.theta >= 0.0 && scenario.theta <= std::numbers::pi)) {
      throw ConfigError("scenario.theta", "must lie in [0, pi]");
    }
    if (!std::isfinite(scenario.e0)) throw ConfigError("scenario.e0", "must be finite");
    if (scenario.initial_state) {
      check_vector_spec(*scenario.initial_state, "scenario.initial_state");
      if (scenario.initial_state->re.size() != 4) throw ConfigError("scenario.initial_state", "must have 4 amplitudes");
    }
  } else {
    if (!scenario.hamiltonian) throw ConfigError("scenario.hamiltonian", "required for custom scenarios");
    if (!scenario.initial_state) throw ConfigError("scenario.initial_state", "required for custom scenarios");
    check_matrix_spec(*scenario.hamiltonian, "scenario.hamiltonian");
    check_vector_spec(*scenario.initial_state, "scenario.initial_state");
    if (scenario.initial_state->re.size() != scenario.hamiltonian->re.size()) {
      throw ConfigError("scenario.initial_state", "dimension does not match the Hamiltonian");
    }
  }
  try {
    sde.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("sde." + e.key(), std::string(e.what()).substr(e.key().size() + 2));
  }
  if (ensemble.n_traj < 1) throw ConfigError("ensemble.n_traj", "must be a positive integer");
  for (std::size_t i = 0; i < ensemble.checkpoints.size(); ++i) {
    const double t = ensemble.checkpoints[i];
    if (!(t >= 0.0 && t <= sde.t_max)) throw ConfigError("ensemble.checkpoints", "times must lie in [0, t_max]");
    if (i > 0 && !(t > ensemble.checkpoints[i - 1])) {
      throw ConfigError("ensemble.checkpoints", "times must be strictly increasing");
    }
  }
  Scenario s = [&] {
    try {
      return build_scenario();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(sc, e.what());
    }
  }();
  try {
    check_stability(sde, s.hamiltonian);
  } catch (const ConfigError& e) {
    throw ConfigError("sde." + e.key(), std::string(e.what()).substr(e.key().size() + 2));
  }
}

void RunConfig::set_seed(std::uint64_t seed) {
  ensemble.seed = seed;
  sde.seed = seed;
}

void RunConfig::make_quick() {
  ensemble.n_traj = std::max<std::int64_t>(1, ensemble.n_traj / 10);
  sde.t_max /= 10.0;
  for (double& t : ensemble.checkpoints) t /= 10.0;
}

Scenario RunConfig::build_scenario() const {
  if (scenario.type == ScenarioSpec::Type::kEpr) {
    const auto& l = scenario.lambda;
    const FilterCoupling c = FilterCoupling::from_list(l[0], l[1], l[2], l[3]);
    Observable h = build_epr_hamiltonian(c, {scenario.theta, scenario.rotated_side}, scenario.e0);
    StateVector psi = scenario.initial_state ? to_state(*scenario.initial_state) : singlet_state();
    return Scenario{std::move(h), std::move(psi)};
  }
  try {
    return Scenario{Observable(to_matrix(*scenario.hamiltonian)), to_state(*scenario.initial_state)};
  } catch (const ValidationError& e) {
    throw ConfigError("scenario.hamiltonian", e.what());
  }
}

EnsembleConfig RunConfig::ensemble_config(unsigned workers) const {
  EnsembleConfig cfg(build_scenario());
  cfg.n_traj = ensemble.n_traj;
  cfg.base = sde;
  cfg.base.seed = ensemble.seed;
  cfg.checkpoints = ensemble.checkpoints;
  cfg.workers = workers;
  return cfg;
}

RunConfig parse_run_config(const std::string& json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  require_object(root, "");
  reject_unknown(root, "", {"scenario", "sde", "ensemble", "output"});
  RunConfig cfg;

  if (root.contains("scenario")) {
    const Json& j = root["scenario"];
    const std::string p = "scenario";
    require_object(j, p);
    reject_unknown(j, p, {"type", "lambda", "theta", "e0", "rotated_side", "hamiltonian", "initial_state"});
    ScenarioSpec& s = cfg.scenario;
    if (j.contains("type")) {
      const Json& t = j["type"];
      if (t == "epr") {
        s.type = ScenarioSpec::Type::kEpr;
      } else if (t == "custom") {
        s.type = ScenarioSpec::Type::kCustom;
      } else {
        throw ConfigError("scenario.type", "expected \"epr\" or \"custom\"");
      }
    }
    if (s.type == ScenarioSpec::Type::kCustom) {
      for (const char* k : {"lambda", "theta", "e0", "rotated_side"}) {
        if (j.contains(k)) throw ConfigError(join(p, k), "not used by custom scenarios");
      }
    }
    if (j.contains("lambda")) {
      const std::vector<double> l = read_reals(j["lambda"], "scenario.lambda");
      if (l.size() != 4) throw ConfigError("scenario.lambda", "expected 4 couplings (l11, l12, l22, l21)");
      std::copy(l.begin(), l.end(), s.lambda.begin());
    }
    if (j.contains("theta")) s.theta = read_real(j["theta"], "scenario.theta");
    if (j.contains("e0")) s.e0 = read_real(j["e0"], "scenario.e0");
    if (j.contains("rotated_side")) {
      const Json& r = j["rotated_side"];
      if (r == "first") {
        s.rotated_side = RotatedSide::kFirst;
      } else if (r == "second") {
        s.rotated_side = RotatedSide::kSecond;
      } else {
        throw ConfigError("scenario.rotated_side", "expected \"first\" or \"second\"");
      }
    }
    if (j.contains("hamiltonian")) s.hamiltonian = read_matrix_spec(j["hamiltonian"], "scenario.hamiltonian");
    if (j.contains("initial_state")) {
      s.initial_state = read_vector_spec(j["initial_state"], "scenario.initial_state");
    }
  }

  if (root.contains("sde")) {
    const Json& j = root["sde"];
    require_object(j, "sde");
    reject_unknown(j, "sde", {"sigma", "dt", "t_max", "collapse_variance_tol", "record_stride"});
    if (j.contains("sigma")) cfg.sde.sigma = read_real(j["sigma"], "sde.sigma");
    if (j.contains("dt")) cfg.sde.dt = read_real(j["dt"], "sde.dt");
    if (j.contains("t_max")) cfg.sde.t_max = read_real(j["t_max"], "sde.t_max");
    if (j.contains("collapse_variance_tol")) {
      cfg.sde.collapse_variance_tol = read_real(j["collapse_variance_tol"], "sde.collapse_variance_tol");
    }
    if (j.contains("record_stride")) cfg.sde.record_stride = read_int(j["record_stride"], "sde.record_stride");
  }

  if (root.contains("ensemble")) {
    const Json& j = root["ensemble"];
    require_object(j, "ensemble");
    reject_unknown(j, "ensemble", {"n_traj", "checkpoints", "seed"});
    if (j.contains("n_traj")) cfg.ensemble.n_traj = read_int(j["n_traj"], "ensemble.n_traj");
    if (j.contains("checkpoints")) cfg.ensemble.checkpoints = read_reals(j["checkpoints"], "ensemble.checkpoints");
    if (j.contains("seed")) cfg.ensemble.seed = read_u64(j["seed"], "ensemble.seed");
  }
  cfg.sde.seed = cfg.ensemble.seed;

  if (root.contains("output")) {
    const Json& j = root["output"];
    require_object(j, "output");
    reject_unknown(j, "output", {"path", "format"});
    if (j.contains("path")) {
      if (!j["path"].is_string()) throw ConfigError("output.path", "expected a string");
      cfg.output.path = j["path"].get<std::string>();
    }
    if (j.contains("format")) {
      const Json& f = j["format"];
      if (f == "csv") {
        cfg.output.format = OutputSpec::Format::kCsv;
      } else if (f == "json") {
        cfg.output.format = OutputSpec::Format::kJson;
      } else {
        throw ConfigError("output.format", "expected \"csv\" or \"json\"");
      }
    }
  }

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
  Json root;
  Json& s = root["scenario"];
  const ScenarioSpec& sc = cfg.scenario;
  if (sc.type == ScenarioSpec::Type::kEpr) {
    s["type"] = "epr";
    s["lambda"] = sc.lambda;
    s["theta"] = sc.theta;
    s["e0"] = sc.e0;
    s["rotated_side"] = side_name(sc.rotated_side);
  } else {
    s["type"] = "custom";
  }
  if (sc.hamiltonian) s["hamiltonian"] = {{"re", sc.hamiltonian->re}, {"im", sc.hamiltonian->im}};
  if (sc.initial_state) s["initial_state"] = {{"re", sc.initial_state->re}, {"im", sc.initial_state->im}};

  root["sde"] = {{"sigma", cfg.sde.sigma},
                 {"dt", cfg.sde.dt},
                 {"t_max", cfg.sde.t_max},
                 {"collapse_variance_tol", cfg.sde.collapse_variance_tol},
                 {"record_stride", cfg.sde.record_stride}};
  root["ensemble"] = {{"n_traj", cfg.ensemble.n_traj},
                      {"checkpoints", cfg.ensemble.checkpoints},
                      {"seed", cfg.ensemble.seed}};
  root["output"] = {{"path", cfg.output.path},
                    {"format", cfg.output.format == OutputSpec::Format::kCsv ? "csv" : "json"}};
  return root.dump(2) + "\n";
}

}  // namespace qreduce
