#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "delaydmd/analysis.hpp"

namespace delaydmd {

/// Everything the CLI needs for `generate` and `run`.
struct RunConfig {
    ExperimentConfig experiment = ExperimentConfig::signal_defaults();
    std::filesystem::path out_dir = "out";
    std::vector<Eigen::Index> emit_modes;
    bool save_modes = false;
};

/// Command-line overrides; unset fields leave lower-precedence values alone.
struct RunOverrides {
    std::optional<std::string> problem;
    std::optional<std::filesystem::path> config_file;
    std::optional<std::uint64_t> seed;
    std::optional<Eigen::Index> q;
    std::optional<Eigen::Index> n_train;
    std::optional<std::string> rank;
    std::optional<std::vector<std::string>> variants;
    std::vector<std::string> measurements;  // "<variant>=<a>"
    std::optional<int> sparsity;
    std::optional<std::vector<Eigen::Index>> emit_modes;
    std::optional<std::filesystem::path> out_dir;
    bool strict = false;
    bool project_before_augment = false;
    bool save_modes = false;

    // problem parameters
    std::optional<Eigen::Index> nt, nx, ny;
    std::optional<double> dt, t0, amp, omega, eps, f1, f2, noise, t_final;
};

/// Defaults for the named problem ("double-gyre", "signal-2d" or "file:<path>").
ExperimentConfig problem_defaults(const std::string& problem);

/// Overlays the fields present in a config-file JSON object onto `config`.
void merge_config_json(RunConfig& config, const nlohmann::json& j);

/// defaults <- config file <- flags, with DELAYDMD_SEED as the seed fallback.
/// Throws delaydmd::Error on invalid input.
RunConfig resolve_run_config(const RunOverrides& flags, const char* env_seed);

}  // namespace delaydmd
