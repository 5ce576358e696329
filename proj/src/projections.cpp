#include "delaydmd/projections.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "delaydmd/errors.hpp"

namespace delaydmd {

namespace {

void check_count(Eigen::Index dim, Eigen::Index a, const char* who) {
    if (dim < 1) fail(ErrorCode::InvalidCount, std::string(who) + ": dimension must be positive");
    if (a < 1 || a > dim) {
        fail(ErrorCode::InvalidCount, std::string(who) + ": measurement count " + std::to_string(a) +
                                          " outside [1, " + std::to_string(dim) + "]");
    }
}

}  // namespace

std::string_view to_string(ProjectionKind kind) {
    switch (kind) {
        case ProjectionKind::Identity: return "identity";
        case ProjectionKind::Sampling: return "sampling";
        case ProjectionKind::Gaussian: return "gaussian";
        case ProjectionKind::Achlioptas: return "achlioptas";
        case ProjectionKind::Krylov: return "krylov";
    }
    return "unknown";
}

ProjectionKind projection_kind_from_string(std::string_view name) {
    for (auto k : {ProjectionKind::Identity, ProjectionKind::Sampling, ProjectionKind::Gaussian,
                   ProjectionKind::Achlioptas, ProjectionKind::Krylov}) {
        if (to_string(k) == name) return k;
    }
    fail(ErrorCode::InvalidParameter, "unknown projection kind \"" + std::string(name) + "\"");
}

ProjectionOperator ProjectionOperator::identity(Eigen::Index dim) {
    if (dim < 1) fail(ErrorCode::InvalidCount, "identity operator: dimension must be positive");
    return ProjectionOperator(ProjectionKind::Identity, dim, dim, 0);
}

ProjectionOperator ProjectionOperator::from_indices(Eigen::Index dim, std::vector<Eigen::Index> indices,
                                                    std::uint64_t seed) {
    check_count(dim, static_cast<Eigen::Index>(indices.size()), "sampling operator");
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
        fail(ErrorCode::InvalidParameter, "sampling operator: indices must be distinct");
    }
    if (indices.front() < 0 || indices.back() >= dim) {
        fail(ErrorCode::InvalidParameter, "sampling operator: index out of range");
    }
    ProjectionOperator op(ProjectionKind::Sampling, static_cast<Eigen::Index>(indices.size()), dim, seed);
    op.indices_ = std::move(indices);
    return op;
}

ProjectionOperator ProjectionOperator::from_dense(ProjectionKind kind, Matrix matrix, std::uint64_t seed) {
    if (matrix.size() == 0) fail(ErrorCode::Shape, "projection operator: empty matrix");
    if (!matrix.allFinite()) fail(ErrorCode::NumericalFailure, "projection operator: non-finite entries");
    ProjectionOperator op(kind, matrix.rows(), matrix.cols(), seed);
    op.dense_ = std::move(matrix);
    return op;
}

ProjectionOperator ProjectionOperator::from_sparse(SparseRows matrix, int sparsity, std::uint64_t seed) {
    ProjectionOperator op(ProjectionKind::Achlioptas, matrix.rows(), matrix.cols(), seed);
    op.sparsity_ = sparsity;
    op.sparse_ = std::move(matrix);
    op.sparse_.makeCompressed();
    return op;
}

Matrix ProjectionOperator::dense() const {
    switch (kind_) {
        case ProjectionKind::Identity: return Matrix::Identity(rows_, cols_);
        case ProjectionKind::Sampling: {
            Matrix out = Matrix::Zero(rows_, cols_);
            for (Eigen::Index k = 0; k < rows_; ++k) out(k, indices_[static_cast<size_t>(k)]) = 1.0;
            return out;
        }
        case ProjectionKind::Achlioptas: return Matrix(sparse_);
        case ProjectionKind::Gaussian:
        case ProjectionKind::Krylov: return dense_;
    }
    return {};
}

ArnoldiResult arnoldi(const MatVec& matvec, const Vector& b, Eigen::Index steps, double tol) {
    const Eigen::Index n = b.size();
    const double bnorm = b.norm();
    if (!(bnorm > 0.0) || !b.allFinite()) fail(ErrorCode::InvalidStartVector, "arnoldi: start vector must be nonzero");
    if (steps < 1 || steps > n) {
        fail(ErrorCode::InvalidCount, "arnoldi: steps " + std::to_string(steps) + " outside [1, " +
                                          std::to_string(n) + "]");
    }

    Matrix v(n, steps + 1);
    Matrix h = Matrix::Zero(steps + 1, steps);
    v.col(0) = b / bnorm;

    auto finish = [&](Eigen::Index completed, Eigen::Index vectors, bool breakdown) {
        ArnoldiResult out;
        out.v_basis = v.leftCols(vectors);
        out.hessenberg = h.topLeftCorner(completed + 1, completed);
        out.steps_completed = completed;
        out.breakdown = breakdown;
        return out;
    };

    for (Eigen::Index i = 0; i < steps; ++i) {
        Vector w = matvec(v.col(i));
        if (w.size() != n) fail(ErrorCode::Shape, "arnoldi: operator changed vector length");
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double hji = v.col(j).dot(w);
            h(j, i) = hji;
            w -= hji * v.col(j);
        }
        const double wnorm = w.norm();
        h(i + 1, i) = wnorm;
        if (wnorm <= tol) return finish(i + 1, i + 1, true);
        // No room for another orthonormal direction in R^n.
        if (i + 1 == n) return finish(n, n, false);
        v.col(i + 1) = w / wnorm;
    }
    return finish(steps, steps + 1, false);
}

ArnoldiResult arnoldi(const Eigen::Ref<const Matrix>& a, const Vector& b, Eigen::Index steps,
                      std::optional<double> tol) {
    if (a.rows() != a.cols() || a.rows() != b.size()) {
        fail(ErrorCode::Shape, "arnoldi: need square A matching the start vector");
    }
    const double threshold = tol.value_or(1e-12 * a.norm());
    return arnoldi([&](const Vector& x) -> Vector { return a * x; }, b, steps, threshold);
}

ProjectionOperator sampling_operator(Eigen::Index dim, Eigen::Index a, std::uint64_t seed) {
    check_count(dim, a, "sampling operator");
    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> pool(static_cast<size_t>(dim));
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
    // Partial Fisher-Yates: the first a slots end up a uniform draw without
    // replacement.
    for (Eigen::Index k = 0; k < a; ++k) {
        std::uniform_int_distribution<Eigen::Index> pick(k, dim - 1);
        std::swap(pool[static_cast<size_t>(k)], pool[static_cast<size_t>(pick(rng))]);
    }
    pool.resize(static_cast<size_t>(a));
    return ProjectionOperator::from_indices(dim, std::move(pool), seed);
}

ProjectionOperator gaussian_operator(Eigen::Index dim, Eigen::Index a, std::uint64_t seed) {
    check_count(dim, a, "gaussian operator");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(a)));
    Matrix r(a, dim);
    for (Eigen::Index i = 0; i < a; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) r(i, j) = normal(rng);
    }
    return ProjectionOperator::from_dense(ProjectionKind::Gaussian, std::move(r), seed);
}

ProjectionOperator achlioptas_operator(Eigen::Index dim, Eigen::Index a, int s, std::uint64_t seed) {
    if (s != 1 && s != 3) {
        fail(ErrorCode::InvalidParameter, "achlioptas operator: sparsity s must be 1 or 3, got " + std::to_string(s));
    }
    check_count(dim, a, "achlioptas operator");
    std::mt19937_64 rng(seed);
    // Outcome 0 -> -1 and 1 -> +1, each with probability 1/(2s); the rest are zero.
    std::uniform_int_distribution<int> draw(0, 2 * s - 1);
    const double value = std::sqrt(static_cast<double>(s)) / std::sqrt(static_cast<double>(a));

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<size_t>(static_cast<double>(a) * static_cast<double>(dim) / s) + 16);
    for (Eigen::Index i = 0; i < a; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            const int outcome = draw(rng);
            if (outcome == 0) entries.emplace_back(i, j, -value);
            else if (outcome == 1) entries.emplace_back(i, j, value);
        }
    }
    ProjectionOperator::SparseRows r(a, dim);
    r.setFromTriplets(entries.begin(), entries.end());
    return ProjectionOperator::from_sparse(std::move(r), s, seed);
}

ProjectionOperator krylov_operator(Eigen::Index dim, Eigen::Index a, std::uint64_t seed) {
    if (a < 1 || a + 1 > dim) {
        fail(ErrorCode::InvalidCount, "krylov operator: need 1 <= a and a + 1 <= D, got a = " + std::to_string(a) +
                                          ", D = " + std::to_string(dim));
    }
    // The D x D matrix is stored in single precision: at D = 2e4 a double
    // copy alone is 3.2 GB. Products accumulate in double.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXf big(dim, dim);
    double frob_sq = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
        for (Eigen::Index i = 0; i < dim; ++i) {
            const float value = static_cast<float>(normal(rng));
            big(i, j) = value;
            frob_sq += static_cast<double>(value) * static_cast<double>(value);
        }
    }
    const MatVec matvec = [&big](const Vector& x) -> Vector {
        Vector y = Vector::Zero(big.rows());
        for (Eigen::Index j = 0; j < big.cols(); ++j) y.noalias() += big.col(j).cast<double>() * x(j);
        return y;
    };

    const ArnoldiResult ar = arnoldi(matvec, Vector::Ones(dim), a, 1e-12 * std::sqrt(frob_sq));
    ProjectionOperator op =
        ProjectionOperator::from_dense(ProjectionKind::Krylov, ar.v_basis.transpose(), seed);
    if (ar.breakdown) {
        op.add_warning("krylov operator: Arnoldi breakdown after " + std::to_string(ar.steps_completed) +
                       " steps; operator has " + std::to_string(op.rows()) + " rows instead of " +
                       std::to_string(a + 1));
    }
    return op;
}

Matrix apply(const ProjectionOperator& r, const Eigen::Ref<const Matrix>& x) {
    if (r.cols() != x.rows()) {
        fail(ErrorCode::Shape, "apply: operator has " + std::to_string(r.cols()) + " columns but data has " +
                                   std::to_string(x.rows()) + " rows");
    }
    switch (r.kind()) {
        case ProjectionKind::Identity: return x;
        case ProjectionKind::Sampling: {
            Matrix out(r.rows(), x.cols());
            for (Eigen::Index k = 0; k < r.rows(); ++k) out.row(k) = x.row(r.indices()[static_cast<size_t>(k)]);
            return out;
        }
        case ProjectionKind::Achlioptas: return r.sparse() * x;
        case ProjectionKind::Gaussian:
        case ProjectionKind::Krylov: return r.dense_storage() * x;
    }
    return {};
}

double gram_deviation(const ProjectionOperator& r) {
    const double scale = std::sqrt(static_cast<double>(r.rows()));
    switch (r.kind()) {
        case ProjectionKind::Identity:
        case ProjectionKind::Sampling: return 0.0;
        case ProjectionKind::Achlioptas: {
            const Matrix gram = Matrix(r.sparse() * r.sparse().transpose());
            return (gram - Matrix::Identity(r.rows(), r.rows())).norm() / scale;
        }
        case ProjectionKind::Gaussian:
        case ProjectionKind::Krylov: {
            const Matrix& dense = r.dense_storage();
            const Matrix gram = dense * dense.transpose();
            return (gram - Matrix::Identity(r.rows(), r.rows())).norm() / scale;
        }
    }
    return 0.0;
}

}  // namespace delaydmd
