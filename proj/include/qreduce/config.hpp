#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qreduce/dynamics.hpp"
#include "qreduce/ensemble.hpp"
#include "qreduce/epr.hpp"

namespace qreduce {

/// Complex array split into real and imaginary parts, as stored in files.
struct ComplexVectorSpec {
  std::vector<double> re;
  std::vector<double> im;
  friend bool operator==(const ComplexVectorSpec&, const ComplexVectorSpec&) = default;
};

struct ComplexMatrixSpec {
  std::vector<std::vector<double>> re;
  std::vector<std::vector<double>> im;
  friend bool operator==(const ComplexMatrixSpec&, const ComplexMatrixSpec&) = default;
};

struct ScenarioSpec {
  enum class Type { kEpr, kCustom };
  Type type = Type::kEpr;
  // epr
  std::array<double, 4> lambda{-3.0, -1.0, 1.0, 3.0};  // (l11, l12, l22, l21)
  double theta = 0.0;
  double e0 = 0.0;
  RotatedSide rotated_side = RotatedSide::kFirst;
  // custom (the initial state is optional for epr, where it defaults to the singlet)
  std::optional<ComplexMatrixSpec> hamiltonian;
  std::optional<ComplexVectorSpec> initial_state;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

struct EnsembleSpec {
  std::int64_t n_traj = 20000;
  std::vector<double> checkpoints;  // empty: 11 evenly spaced times
  std::uint64_t seed = 0;
  friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
};

struct OutputSpec {
  enum class Format { kCsv, kJson };
  std::string path;  // empty or "-" writes to standard output
  Format format = Format::kCsv;
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

/// Run file. Every section and key is optional except the matrix of a
/// custom scenario; unknown keys are rejected.
struct RunConfig {
  ScenarioSpec scenario;
  SdeConfig sde{.t_max = 40.0};  // sde.seed mirrors ensemble.seed
  EnsembleSpec ensemble;
  OutputSpec output;

  /// Range checks; throws ConfigError with a dotted key such as "sde.sigma".
  void validate() const;
  /// Replaces the seed in both places it is held.
  void set_seed(std::uint64_t seed);
  /// n_traj and t_max divided by 10 (n_traj at least 1), checkpoints rescaled.
  void make_quick();

  Scenario build_scenario() const;
  EnsembleConfig ensemble_config(unsigned workers = 0) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
/// Canonical JSON text (2-space indent, fixed key order); parses back to an equal config.
std::string serialize_run_config(const RunConfig& cfg);

}  // namespace qreduce
