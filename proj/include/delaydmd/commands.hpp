#pragma once

#include <filesystem>
#include <iosfwd>

#include "delaydmd/run_config.hpp"

namespace delaydmd {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kVariantFailure = 2;
inline constexpr int kUsage = 64;
inline constexpr int kIo = 74;
}  // namespace exit_code

/// Writes `<out>/<problem>.csv` and its `.meta.json` sidecar; returns the base path.
std::filesystem::path cmd_generate(const RunConfig& config, std::ostream& log);

/// Runs the comparison and writes report.json plus per-variant CSV/JSON
/// artifacts under config.out_dir. Returns the exit code.
int cmd_run(const RunConfig& config, std::ostream& log);

/// Prints the spectrum of a saved model, one eigenvalue per line.
void cmd_spectrum(const std::filesystem::path& model_json, std::ostream& out);

/// Full command-line entry point.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace delaydmd
