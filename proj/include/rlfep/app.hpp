#pragma once

#include "rlfep/harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rlfep {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitPass = 0, kExitViolations = 1, kExitError = 2 };

/// Fully resolved options of one CLI run; together with the config this is
/// all a manifest needs to reproduce the outputs.
struct RunRequest {
    std::string command;  // trim | fly | train | sweep | plot
    std::string scenario = "1";
    std::optional<ProtectionMode> mode;
    std::optional<std::filesystem::path> checkpoint;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir = "out";
    int jobs = 1;
    std::optional<double> p_cmd;         // sweep: constant roll command
    std::optional<int> episodes;         // train: episode cap
    bool logs = false;                   // sweep: keep per-run episode CSVs
    std::optional<std::filesystem::path> input;  // plot: episode or sweep CSV
};

/// Runs one subcommand, writes its outputs and `manifest.json` into
/// `request.out_dir`, and returns the exit code.
int execute(const RunRequest& request, const WorkbenchConfig& config, const std::vector<std::string>& argv,
            std::ostream& out);

/// Re-executes a manifest into `out_dir` and compares every recorded output
/// hash. Returns kExitPass only when all outputs are bit-identical.
int replay(const std::filesystem::path& manifest, const std::filesystem::path& out_dir, std::ostream& out);

/// FNV-1a of a file's bytes as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

std::string git_describe();

/// Entry point of the `rlfep` command-line tool.
int cli_main(int argc, char** argv);

}  // namespace rlfep
