#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcell/compare.hpp"

namespace dcell::cli {

enum class Mode { Mesh, RunExclusion, RunPoint, Compare, AnalyticChecks, Fig2, Fig3 };

const char* to_string(Mode m);

enum ExitCode : int { kOk = 0, kConfigError = 2, kSolverError = 3, kCheckFailed = 4 };

/// Invalid configuration; `key()` names the offending option.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Thrown by load_config when --help was given; carries the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Mode mode = Mode::Compare;
  double diffusion = 1.0;
  double phi = 1.0;
  double uptake = 1.0;
  Point2 center{5.0, 5.0};
  double radius = 0.25;
  double side = 10.0;
  double h = 0.2495;
  double dt = 0.04;
  double t_end = 40.0;
  double eps = 0.02;
  bool eps_is_variance = false;
  int nq = 64;
  Coupling coupling = Coupling::Implicit;
  double rel_tol = 1e-10;
  std::filesystem::path out = "out";
  int jobs = 1;
  std::vector<double> snapshot_times;

  /// Standard deviation of the Gaussian load.
  [[nodiscard]] double sigma() const;
  [[nodiscard]] CellSpec cell() const;
  [[nodiscard]] ExclusionConfig exclusion() const;
  [[nodiscard]] PointConfig point() const;
  [[nodiscard]] ComparisonConfig comparison() const;
  /// One-line `key=value` rendering used in CSV comment lines.
  [[nodiscard]] std::string describe() const;
  /// Throws ConfigError on the first violated constraint.
  void validate() const;
};

/// Parses `dirac-cell <mode> [options]`. Options may also come from a TOML
/// file given with --config; command-line flags take precedence.
RunConfig load_config(int argc, const char* const* argv);

struct CheckResult {
  std::string name;
  double value;
  double reference;
  double tolerance;
  bool pass;
};

/// The analytic self-checks, each with its measured and reference value.
std::vector<CheckResult> analytic_checks();

void cmd_mesh(const RunConfig& config, std::ostream& log);
void cmd_run_exclusion(const RunConfig& config, std::ostream& log);
void cmd_run_point(const RunConfig& config, std::ostream& log);
void cmd_compare(const RunConfig& config, std::ostream& log);
/// Returns kCheckFailed when any check fails.
int cmd_analytic_checks(const RunConfig& config, std::ostream& log);
void cmd_fig2(const RunConfig& config, std::ostream& log);
void cmd_fig3(const RunConfig& config, std::ostream& log);

/// Full entry point: parse, dispatch, map exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dcell::cli
