#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

#include "delaydmd/numerics.hpp"

namespace delaydmd {

enum class ProjectionKind { Identity, Sampling, Gaussian, Achlioptas, Krylov };

std::string_view to_string(ProjectionKind kind);
ProjectionKind projection_kind_from_string(std::string_view name);

/// An a x D measurement operator. Storage depends on the kind: Identity is
/// implicit, Sampling keeps row indices, Achlioptas is sparse, Gaussian and
/// Krylov are dense.
class ProjectionOperator {
public:
    using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    static ProjectionOperator identity(Eigen::Index dim);
    static ProjectionOperator from_indices(Eigen::Index dim, std::vector<Eigen::Index> indices, std::uint64_t seed);
    static ProjectionOperator from_dense(ProjectionKind kind, Matrix matrix, std::uint64_t seed);
    static ProjectionOperator from_sparse(SparseRows matrix, int sparsity, std::uint64_t seed);

    ProjectionKind kind() const { return kind_; }
    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }
    std::uint64_t seed() const { return seed_; }
    int sparsity() const { return sparsity_; }
    const std::vector<Eigen::Index>& indices() const { return indices_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

    /// Materialised a x D matrix; allocates rows * cols doubles.
    Matrix dense() const;
    const SparseRows& sparse() const { return sparse_; }
    /// Backing store for the Gaussian and Krylov kinds (empty otherwise).
    const Matrix& dense_storage() const { return dense_; }

private:
    ProjectionOperator(ProjectionKind kind, Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
        : kind_(kind), rows_(rows), cols_(cols), seed_(seed) {}

    ProjectionKind kind_;
    Eigen::Index rows_;
    Eigen::Index cols_;
    std::uint64_t seed_;
    int sparsity_ = 0;
    std::vector<Eigen::Index> indices_;
    Matrix dense_;
    SparseRows sparse_;
    std::vector<std::string> warnings_;
};

struct ArnoldiResult {
    Matrix v_basis;    // n x (steps_completed + 1), or n x steps_completed on breakdown
    Matrix hessenberg; // (steps_completed + 1) x steps_completed
    Eigen::Index steps_completed = 0;
    bool breakdown = false;
};

using MatVec = std::function<Vector(const Vector&)>;

/// Arnoldi process with modified Gram-Schmidt. Stops early (breakdown) once
/// the orthogonalised direction has norm <= tol. The default tolerance is
/// 1e-12 * ||A||_F.
ArnoldiResult arnoldi(const Eigen::Ref<const Matrix>& a, const Vector& b, Eigen::Index steps,
                      std::optional<double> tol = std::nullopt);
ArnoldiResult arnoldi(const MatVec& matvec, const Vector& b, Eigen::Index steps, double tol);

ProjectionOperator sampling_operator(Eigen::Index dim, Eigen::Index a, std::uint64_t seed);
ProjectionOperator gaussian_operator(Eigen::Index dim, Eigen::Index a, std::uint64_t seed);
ProjectionOperator achlioptas_operator(Eigen::Index dim, Eigen::Index a, int s, std::uint64_t seed);

/// V^T from `a` Arnoldi steps on a seeded D x D standard-normal matrix with
/// start vector ones(D): a + 1 orthonormal rows (fewer on breakdown, with a
/// warning recorded on the operator).
ProjectionOperator krylov_operator(Eigen::Index dim, Eigen::Index a, std::uint64_t seed);

Matrix apply(const ProjectionOperator& r, const Eigen::Ref<const Matrix>& x);

/// ||R R^T - I_a||_F / sqrt(a).
double gram_deviation(const ProjectionOperator& r);

}  // namespace delaydmd
