#pragma once

// Command-line front end. Each command turns a RunConfig into a set of
// output files plus an exit code; nothing here touches the filesystem
// except write_outputs.
//
// Exit codes: 0 success, 2 config error, 3 hypothesis violation,
// 4 numerical failure.

#include "nsavg/filippov.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nsavg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitHypothesis = 3;
inline constexpr int kExitNumerical = 4;

int exit_code_for(ErrorCategory c);

struct RunConfig {
    std::string command;  // average | cycles | degree | integrate | regularize
    std::string system;   // built-in label
    std::string config_path;
    std::optional<double> eps;
    std::vector<double> delta;
    std::optional<Box> box;
    std::optional<int> grid;
    std::optional<double> tol;
    std::string out = ".";
    std::vector<std::string> formats{"csv", "json", "svg"};
    bool app = false;
    CertifyMode mode = CertifyMode::two_sided;

    // degree
    std::string map = "identity";  // identity | square | averaged
    std::vector<double> center;
    std::optional<double> radius;
    int dim = 2;

    // integrate / regularize
    std::vector<double> z;
    std::optional<double> t0, t1;
};

struct CommandOutput {
    int exit_code = kExitOk;
    std::vector<std::pair<std::string, std::string>> files;  // file name -> content
    std::string out;  // stdout summary
    std::string err;  // stderr messages
};

/// "lo,hi[;lo,hi...]" per axis.
Box parse_box(const std::string& text);
CertifyMode parse_mode(const std::string& text);

/// Fills eps, delta, grid and tol from the config file where not given on the command line.
void apply_config_run_keys(RunConfig& cfg);

/// The --system built-in or the --config system, with the --box override applied.
PiecewiseSystem resolve_system(const RunConfig& cfg);

CommandOutput cmd_average(const RunConfig& cfg);
CommandOutput cmd_cycles(const RunConfig& cfg);
CommandOutput cmd_degree(const RunConfig& cfg);
CommandOutput cmd_integrate(const RunConfig& cfg);
CommandOutput cmd_regularize(const RunConfig& cfg);

/// Dispatches on cfg.command; every nsavg::Error becomes a stage-tagged message and exit code.
CommandOutput run_command(const RunConfig& cfg);

/// Parses argv into a RunConfig. Throws ConfigError on bad arguments; returns
/// nullopt after printing help.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::string* help_text = nullptr);

void write_outputs(const CommandOutput& out, const std::string& dir);

/// Full CLI: parse, run, write files, print; returns the exit code.
int main_entry(int argc, const char* const* argv);

}  // namespace nsavg::cli
