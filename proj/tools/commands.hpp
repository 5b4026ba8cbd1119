#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bvm/config.hpp"
#include "bvm/error.hpp"

namespace bvm::cli {

/// Process exit codes; a stable contract.
enum ExitCode : int {
  kExitOk = 0,
  kExitSchema = 2,
  kExitEstimation = 3,
  kExitRuleMismatch = 4,
  kExitAcceptance = 5,
};

/// Two configs that must share an agreement definition do not.
class RuleMismatch : public Error {
 public:
  using Error::Error;
};

/// Flags shared by every subcommand; unset values defer to the config.
struct CommonOptions {
  std::optional<RngSeed> seed;
  std::optional<std::size_t> samples;
  std::string out;
  std::string format;
  unsigned threads = 0;
};

/// Inclusive axis lo, lo + step, ..., hi parsed from "lo:hi:step".
struct AxisSpec {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
};
AxisSpec parse_axis(const std::string& text, const std::string& flag);

/// Loads a config file and applies --seed/--samples overrides.
ScenarioConfig load_scenario(const std::string& path, const CommonOptions& opts);

/// Runs the configured estimator (mc or grid) on the scenario.
BvmEstimate estimate_config(const ScenarioConfig& c, unsigned threads);

/// RunRecord envelope: tool, version, command, resolved config, seed,
/// command-specific fields and wall time.
Json run_record(const std::string& command, const Json& config, RngSeed seed, const Json& fields, double seconds);

// Each command writes human-readable output to `out` and returns an exit
// code; failures are reported by throwing (see run()).
int cmd_validate(const std::string& config, const CommonOptions& opts, std::ostream& out);
int cmd_ratio(const std::string& config, const std::string& config_alt, double prior, double prior_alt,
              const CommonOptions& opts, std::ostream& out);
int cmd_sweep(const std::vector<std::string>& configs, const AxisSpec& gamma, const AxisSpec& epsilon,
              std::optional<double> m, const CommonOptions& opts, std::ostream& out);
int cmd_reproduce(const std::string& example, std::size_t seeds, const CommonOptions& opts, std::ostream& out);
int cmd_metric(const std::string& name, const std::string& config, const CommonOptions& opts, std::ostream& out);

/// Names of the metric subcommands.
const std::vector<std::string>& metric_names();

/// Parses argv, dispatches and maps exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bvm::cli
