#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "qreduce/config.hpp"
#include "qreduce/dynamics.hpp"
#include "qreduce/ensemble.hpp"

namespace qreduce {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kIntegrationFailure = 1;
inline constexpr int kValidation = 2;
inline constexpr int kNoCollapse = 3;
inline constexpr int kCheckFailed = 4;
}  // namespace exit_code

inline constexpr const char* kArtifactVersion = "1.0.0";

struct CliOptions {
  std::string config_path;  // empty: built-in defaults
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;  // "csv" | "json"
  bool quick = false;
  unsigned workers = 0;
};

/// Config with command-line overrides applied and revalidated.
RunConfig resolve_config(const CliOptions& opts);

/// Columns: t, re_z1, im_z1, ..., energy_mean, variance, third_moment,
/// quadric_residual (empty unless the state is 4-dimensional).
std::string trajectory_csv(const Trajectory& traj);
std::string trajectory_json(const Trajectory& traj, const RunConfig& cfg);

/// Report, verdicts, config echo and version. Wall-clock time is left out
/// so equal inputs give byte-identical text.
std::string ensemble_json(const EnsembleRun& run, const RunConfig& cfg);

int cmd_simulate(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_ensemble(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_geometry_selftest(std::ostream& out);
int cmd_predict(double theta, std::ostream& out, std::ostream& err);

/// Full command line: `qreduce <subcommand> [flags]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qreduce
