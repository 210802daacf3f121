#pragma once
// Runs scenario descriptions on a bounded worker pool and writes
// <name>.trace.csv, <name>.metrics.json and <name>.cert.txt per scenario.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pbsmc/config.hpp"

namespace pbsmc {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitCertification = 3,
  kExitDivergence = 4,
};

struct RunOptions {
  std::string out_dir = ".";
  int workers = 1;
  bool waive_assumptions = false;
  std::optional<double> step;     ///< overrides every scenario's h
  std::optional<double> t_final;  ///< overrides every scenario's t_final
};

/// Applies the step / t_final overrides.
std::vector<ScenarioDesc> apply_overrides(std::vector<ScenarioDesc> descs,
                                          const RunOptions& opts);

struct CertificationReport {
  bool ok = true;
  std::string failure;  ///< set when !ok
  std::string text;
};

/// Lambda certification, gradient-domination constants, reaching-time bound and
/// gamma ranges for one scenario, without simulating. Uses the scenario's box,
/// or q in [-pi, pi]^m, eta in [-1, 1]^m when it has none.
CertificationReport certify(const ScenarioDesc& desc);

struct ScenarioOutcome {
  std::string name;
  int code = kExitOk;
  std::string message;
  std::optional<Metrics> metrics;
};

/// Outcomes are returned in input order regardless of the worker count.
std::vector<ScenarioOutcome> run_scenarios(const std::vector<ScenarioDesc>& descs,
                                           const RunOptions& opts, std::ostream& log);

/// Code of the first failing outcome, or kExitOk.
int exit_code(const std::vector<ScenarioOutcome>& outcomes);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace pbsmc
