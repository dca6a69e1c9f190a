#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <obsplit/errors.hpp>

#include "scenario.hpp"

namespace obsplit::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
};

/// ErrorKind -> exit status.
int exit_code_for(ErrorKind kind);

struct CommandResult {
  int exit_code = kExitOk;
  /// File names relative to the output directory.
  std::vector<std::string> outputs;
  /// Ordered key-value diagnostics for the manifest.
  std::vector<std::pair<std::string, std::string>> diagnostics;
  OdeStats stats;
};

/// %.17g, "nan" and "inf" spelled consistently.
std::string fmt(double v);

CommandResult cmd_trace_cone(const Scenario& s, const std::filesystem::path& out);
CommandResult cmd_invert(const Scenario& s, const std::filesystem::path& out);
CommandResult cmd_observe(const Scenario& s, const std::filesystem::path& out);
CommandResult cmd_newton_limit(const Scenario& s, const std::filesystem::path& out);
/// Writes one line per check to `log`.
CommandResult cmd_validate(const Scenario& s, const std::filesystem::path& out, std::ostream& log);

struct ManifestInfo {
  std::string command;
  double wall_clock_s = 0.0;
  int threads = 1;
  std::uint64_t seed = 0;
  int exit_code = 0;
  std::string error;
};

void write_manifest(const Scenario& s, const CommandResult& r, const ManifestInfo& info,
                    const std::filesystem::path& out);

/// Full command line entry point; returns the exit status.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace obsplit::cli
