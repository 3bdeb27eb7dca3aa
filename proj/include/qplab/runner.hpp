#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qplab/config.hpp"

namespace qplab {

// Exit statuses of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

const std::vector<std::string>& subcommands();

// Command line flags that take precedence over the config file.
struct RunOverrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<std::size_t> steps;
};

void apply_overrides(ScenarioConfig& c, const RunOverrides& o);

// Runs one subcommand on a validated config and writes its CSV files and
// manifest.json into run.outputs. Library errors propagate. Returns 0, or 1
// when verify reports a failed criterion.
int run_subcommand(const std::string& name, const ScenarioConfig& c, std::ostream& log);

// Exit status for an exception escaping run_subcommand: 2 for invalid input
// (config and domain errors), 3 for numerical failures.
int exit_code_for(const std::exception& e);

// Load (defaults when no path is given), override, validate, run. Errors are
// reported on `err` and mapped to an exit status; nothing throws.
int execute(const std::string& name, const std::optional<std::string>& config_path, const RunOverrides& overrides,
            std::ostream& log, std::ostream& err);

}  // namespace qplab
