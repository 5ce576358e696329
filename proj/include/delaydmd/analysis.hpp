#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "delaydmd/dmd.hpp"
#include "delaydmd/problems.hpp"

namespace delaydmd {

// Error metrics ------------------------------------------------------------------

inline constexpr double kErrorFloor = 1e-12;

struct ErrorSeries {
    std::vector<double> times;
    std::vector<double> rel_error;
    Eigen::Index n_train = 0;

    double mean(Eigen::Index begin, Eigen::Index end) const;
    double train_mean() const { return mean(0, n_train); }
    double test_mean() const { return mean(n_train, static_cast<Eigen::Index>(rel_error.size())); }
    double train_max() const;

    bool operator==(const ErrorSeries&) const = default;
};

/// e_k = ||x_k - x_pred(t_k)||_2 / max(||x_k||_2, kErrorFloor) for each
/// column of `truth`, where t_k is the column's absolute time.
ErrorSeries relative_error_series(const DmdModel& model, const SnapshotMatrix& truth, Eigen::Index n_train = 0);

enum class FieldPart { Real, Imag, Abs };
FieldPart field_part_from_string(std::string_view s);
std::string_view to_string(FieldPart p);

/// First base_m entries of mode column k reshaped to ny x nx (row iy holds
/// the nodes at y(iy)).
Matrix mode_field(const DmdModel& model, Eigen::Index k, const GridMeta& grid, FieldPart part);

// Experiments -------------------------------------------------------------------

/// Sub-seed for a named component: splitmix64(master ^ fnv1a64(name)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view component);

enum class ProblemKind { DoubleGyre, Signal, File };
std::string_view to_string(ProblemKind k);

struct ProblemSpec {
    ProblemKind kind = ProblemKind::Signal;
    DoubleGyreParams gyre;
    SignalParams signal;
    std::filesystem::path file;

    std::string name() const;
    SnapshotMatrix generate(std::uint64_t master_seed) const;
};

/// One requested fit. `name` is one of classic, sampling, gaussian,
/// achlioptas, krylov; `measurements` is the operator row count.
struct VariantSpec {
    std::string name;
    Eigen::Index measurements = 0;
    int sparsity = 3;

    bool operator==(const VariantSpec&) const = default;
};

inline const std::vector<std::string>& variant_names() {
    static const std::vector<std::string> names{"classic", "sampling", "gaussian", "achlioptas", "krylov"};
    return names;
}

struct ExperimentConfig {
    ProblemSpec problem;
    Eigen::Index q = 2;
    Eigen::Index n_train = 64;
    RankPolicy rank;
    std::vector<VariantSpec> variants;
    std::uint64_t seed = 1;
    bool strict = false;
    bool project_before_augment = false;

    /// Settings that reproduce the two benchmark studies.
    static ExperimentConfig double_gyre_defaults();
    static ExperimentConfig signal_defaults();

    void validate() const;
};

struct VariantReport {
    std::string variant;
    Eigen::Index measurements = 0;
    std::optional<int> sparsity;
    std::optional<std::uint64_t> seed;
    Eigen::Index rank = 0;
    std::vector<SpectrumEntry> spectrum;
    ErrorSeries errors;
    std::optional<double> gram_deviation;
    double wall_time = 0.0;
    std::optional<std::string> error;
    std::vector<std::string> warnings;

    bool ok() const { return !error.has_value(); }
    bool operator==(const VariantReport&) const = default;
};

struct ExperimentReport {
    std::string problem;
    nlohmann::json config;
    nlohmann::json seeds;
    std::vector<VariantReport> variants;

    const VariantReport* find(std::string_view variant) const;
    bool operator==(const ExperimentReport&) const = default;
};

/// Generates (or loads) the data once, fits every variant on the first
/// n_train snapshots, and scores each on the full window. Fit errors are
/// recorded per variant unless config.strict. Fitted models are appended to
/// `models` when given (empty-rank placeholders for failed variants).
ExperimentReport run_comparison(const ExperimentConfig& config, std::vector<DmdModel>* models = nullptr);

/// Fits a single variant on `train`; the operator seed is derived from `master_seed`.
DmdModel fit_variant(const VariantSpec& spec, const SnapshotMatrix& train, Eigen::Index q, const RankPolicy& rank,
                     std::uint64_t master_seed, bool project_before_augment, std::optional<double>* gram = nullptr);

nlohmann::json to_json(const ExperimentConfig& c);
nlohmann::json to_json(const VariantReport& v);
nlohmann::json to_json(const ExperimentReport& r);
ExperimentReport report_from_json(const nlohmann::json& j);

/// Report JSON with every wall_time removed; used for reproducibility checks.
nlohmann::json without_wall_times(const nlohmann::json& report);

}  // namespace delaydmd
