#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace liborforge {

// Command-line overrides; unset fields fall back to the spec document.
struct CliOptions {
    std::string spec_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> step;
    std::optional<int> workers;
    std::string out_dir = ".";
    bool zero_drift = false;
    std::vector<double> strikes;  // empty: strikes from the spec file
    bool skip_validation = false;
    int samples = 1000;         // random (t, x) per tenor in the residual sweep
    int audit_samples = 10000;  // random states or pairs per statistical audit
};

enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 1,
    exit_schema = 2,
    exit_invariant = 3,
    exit_numerical = 4,
};

// Shortest round-trip decimal form.
std::string format_number(double value);

// Each command writes report.txt plus its CSVs into out_dir and returns an
// exit code; library exceptions propagate.
int run_validate(const CliOptions& options, std::ostream& out);
int run_simulate(const CliOptions& options, std::ostream& out);
int run_riccati(const CliOptions& options, std::ostream& out);
int run_check_martingale(const CliOptions& options, std::ostream& out);
int run_price(const CliOptions& options, std::ostream& out);

// Dispatches by name and maps exceptions to exit codes, printing the message to err.
int run_command(const std::string& command, const CliOptions& options, std::ostream& out, std::ostream& err);

}  // namespace liborforge
