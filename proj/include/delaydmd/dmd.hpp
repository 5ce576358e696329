#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "delaydmd/numerics.hpp"
#include "delaydmd/projections.hpp"
#include "delaydmd/snapshots.hpp"

namespace delaydmd {

/// How many singular triplets survive truncation.
struct RankPolicy {
    enum class Mode { Fixed, RelativeThreshold };

    Mode mode = Mode::RelativeThreshold;
    Eigen::Index rank = 0;  // Fixed
    double tol = 1e-10;     // RelativeThreshold: keep sigma_i > tol * sigma_1

    static RankPolicy fixed(Eigen::Index r);
    static RankPolicy threshold(double tol);

    void validate() const;
    /// "fixed:R" or "tol:T".
    std::string to_string() const;
    static RankPolicy parse(std::string_view text);

    bool operator==(const RankPolicy&) const = default;
};

enum class VariantKind { Classic, Tdc, Projected };

/// Discrete eigenvalues below this modulus are dropped from fitted models.
inline constexpr double kZeroEigenvalue = 1e-12;
/// Half-width of the band around |mu| = 1 classified as "on" the unit circle.
inline constexpr double kUnitCircleBand = 1e-6;

struct DmdModel {
    ComplexMatrix modes;        // D_out x r
    ComplexVector eigenvalues;  // mu
    ComplexVector exponents;    // omega = ln(mu) / dt
    ComplexVector amplitudes;   // b
    Eigen::Index rank = 0;
    Eigen::Index q = 1;
    Eigen::Index base_m = 0;
    double dt = 1.0;
    double t0 = 0.0;
    VariantKind variant = VariantKind::Classic;
    std::optional<ProjectionKind> projection;
    Eigen::Index measurements = 0;  // projected fits only
    std::vector<std::string> warnings;

    /// "classic", "tdc" or "projected:<kind>".
    std::string tag() const;
};

DmdModel dmd_classic(const Eigen::Ref<const Matrix>& x1, const Eigen::Ref<const Matrix>& x2, double dt,
                     const RankPolicy& policy = {}, double t0 = 0.0);

DmdModel dmd_tdc(const SnapshotMatrix& x, Eigen::Index q, const RankPolicy& policy = {});

/// Fits in the sketch space of `r` and recovers full-space modes from the
/// unprojected X2_aug. With `project_before_augment` the operator acts on raw
/// M-dimensional snapshots which are then delay-embedded.
DmdModel dmd_projected(const SnapshotMatrix& x, Eigen::Index q, const ProjectionOperator& r,
                       const RankPolicy& policy = {}, bool project_before_augment = false);

/// Re[Phi diag(exp(omega * k dt)) b], restricted to the first base_m rows.
Vector predict(const DmdModel& model, Eigen::Index k);
Vector predict_at(const DmdModel& model, double t);

/// Left singular vectors of the whole snapshot matrix, truncated per policy.
Matrix pod_modes(const SnapshotMatrix& x, const RankPolicy& policy = {});

enum class CirclePosition { Inside, On, Outside };
std::string_view to_string(CirclePosition c);
CirclePosition circle_position_from_string(std::string_view s);

struct SpectrumEntry {
    Complex mu;
    Complex omega;
    double amp_abs = 0.0;
    CirclePosition circle = CirclePosition::Inside;

    bool operator==(const SpectrumEntry&) const = default;
};

std::vector<SpectrumEntry> spectrum(const DmdModel& model);
CirclePosition classify(const Complex& mu);

/// Greedy nearest-conjugate matching. Returns, per eigenvalue, the index of
/// its partner (itself for a real eigenvalue).
std::vector<Eigen::Index> conjugate_pairs(const ComplexVector& mu);
/// Largest |mu_i - conj(mu_partner(i))| over the greedy matching.
double conjugate_closure_defect(const ComplexVector& mu);

// Serialization: JSON with complex numbers as {"re", "im"} objects. Modes are
// written only on request, to a CSV of 2 * D_out rows (real parts, then
// imaginary parts) and r columns.
void save_model(const DmdModel& model, const std::filesystem::path& json_path,
                const std::optional<std::filesystem::path>& modes_csv = std::nullopt);
DmdModel load_model(const std::filesystem::path& json_path);

}  // namespace delaydmd
