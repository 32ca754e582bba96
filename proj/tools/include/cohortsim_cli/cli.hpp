#pragma once

#include "cohortsim/config.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cohortsim::cli {

/// Bad command line: unknown flag, malformed or out-of-range value, missing file.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HelpRequested : UsageError {
    using UsageError::UsageError;
};

enum class Command { generate_city, run, sweep, calibrate, checkpoint };

const char* to_string(Command command);

struct GridAxis {
    std::string key;                 ///< canonical dotted key
    std::vector<std::string> values; ///< as typed
};

struct RunSpec {
    Command command = Command::run;
    std::optional<std::filesystem::path> config_path;
    std::vector<std::filesystem::path> overlays;
    std::filesystem::path output_root = "runs";
    std::vector<std::string> raw_overrides; ///< exactly as typed after --set
    std::vector<Override> overrides;
    std::vector<GridAxis> grid;
    std::vector<std::string> raw_grid;
    std::optional<int> runs;
    std::optional<std::filesystem::path> resume;
    std::optional<int> checkpoint_day;
    unsigned threads = 0;
    std::vector<std::string> argv; ///< full invocation, for the metadata file

    /// Number of grid cells (1 without --grid).
    std::size_t cell_count() const;
};

/// Parses and validates an argument vector (argv[0] is the program name).
/// Throws UsageError, or HelpRequested (carrying the help text) for --help.
RunSpec parse_cli(const std::vector<std::string>& args);

/// Resolved configuration: defaults or --config, then overlays, then overrides.
Config resolve_config(const RunSpec& spec);

/// Every combination of grid values as (key, value) lists, in row-major order
/// with the last axis varying fastest.
std::vector<std::vector<std::pair<std::string, std::string>>> expand_grid(const std::vector<GridAxis>& grid);

/// `<timestamp>-<hash>` where the hash covers the config snapshot and the
/// command line.
std::string run_directory_name(const std::string& config_yaml, const std::vector<std::string>& argv);

/// Executes the command; returns the process exit code (0 only when the
/// command finished and every hard invariant held).
int execute(const RunSpec& spec);

int main(int argc, char** argv);

} // namespace cohortsim::cli
