#include "delaydmd/numerics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "delaydmd/errors.hpp"

namespace delaydmd {

namespace {

std::string dims(Eigen::Index rows, Eigen::Index cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

template <typename Solver>
EigResult sorted_eig(const Solver& solver) {
    const ComplexVector values = solver.eigenvalues();
    const ComplexMatrix vectors = solver.eigenvectors();
    std::vector<Eigen::Index> order(static_cast<size_t>(values.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        return eigen_order_less(values(i), values(j));
    });

    EigResult out;
    out.eigenvalues.resize(values.size());
    out.eigenvectors.resize(vectors.rows(), vectors.cols());
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        out.eigenvalues(k) = values(order[static_cast<size_t>(k)]);
        ComplexVector w = vectors.col(order[static_cast<size_t>(k)]);
        const double norm = w.norm();
        if (norm > 0.0) w /= norm;
        out.eigenvectors.col(k) = w;
    }
    return out;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NumericalFailure: return "numerical-failure";
        case ErrorCode::DegenerateModes: return "degenerate-modes";
        case ErrorCode::DegenerateData: return "degenerate-data";
        case ErrorCode::ZeroInitialCondition: return "zero-initial-condition";
        case ErrorCode::InsufficientSnapshots: return "insufficient-snapshots";
        case ErrorCode::InsufficientMeasurements: return "insufficient-measurements";
        case ErrorCode::InvalidDelay: return "invalid-delay";
        case ErrorCode::InvalidSplit: return "invalid-split";
        case ErrorCode::InvalidGrid: return "invalid-grid";
        case ErrorCode::InvalidCount: return "invalid-count";
        case ErrorCode::InvalidParameter: return "invalid-parameter";
        case ErrorCode::InvalidStartVector: return "invalid-start-vector";
        case ErrorCode::SamplingRate: return "sampling-rate";
        case ErrorCode::Shape: return "shape";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::Consistency: return "consistency";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

bool all_finite(const Eigen::Ref<const Matrix>& a) {
    return a.allFinite();
}

bool eigen_order_less(const Complex& a, const Complex& b) {
    const double ma = std::abs(a);
    const double mb = std::abs(b);
    if (ma != mb) return ma > mb;
    return a.imag() > b.imag();
}

SvdResult thin_svd(const Eigen::Ref<const Matrix>& a) {
    if (a.size() == 0) fail(ErrorCode::Shape, "thin_svd: empty matrix");
    if (!a.allFinite()) {
        fail(ErrorCode::NumericalFailure, "thin_svd: non-finite entries in " + dims(a.rows(), a.cols()) + " matrix");
    }

    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        fail(ErrorCode::NumericalFailure, "thin_svd: no convergence for " + dims(a.rows(), a.cols()) + " matrix");
    }

    SvdResult out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    for (Eigen::Index j = 0; j < out.u.cols(); ++j) {
        Eigen::Index imax = 0;
        out.u.col(j).cwiseAbs().maxCoeff(&imax);
        if (out.u(imax, j) < 0.0) {
            out.u.col(j) *= -1.0;
            out.v.col(j) *= -1.0;
        }
    }
    return out;
}

EigResult eig_dense(const Eigen::Ref<const Matrix>& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        fail(ErrorCode::Shape, "eig_dense: expected a square matrix, got " + dims(a.rows(), a.cols()));
    }
    if (!a.allFinite()) fail(ErrorCode::NumericalFailure, "eig_dense: non-finite entries");
    Eigen::EigenSolver<Matrix> solver(a, true);
    if (solver.info() != Eigen::Success) {
        fail(ErrorCode::NumericalFailure, "eig_dense: no convergence for " + dims(a.rows(), a.cols()) + " matrix");
    }
    return sorted_eig(solver);
}

EigResult eig_dense(const Eigen::Ref<const ComplexMatrix>& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        fail(ErrorCode::Shape, "eig_dense: expected a square matrix, got " + dims(a.rows(), a.cols()));
    }
    if (!a.allFinite()) fail(ErrorCode::NumericalFailure, "eig_dense: non-finite entries");
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(a, true);
    if (solver.info() != Eigen::Success) {
        fail(ErrorCode::NumericalFailure, "eig_dense: no convergence for " + dims(a.rows(), a.cols()) + " matrix");
    }
    return sorted_eig(solver);
}

ComplexVector pseudoinverse_apply(const Eigen::Ref<const ComplexMatrix>& phi,
                                  const Eigen::Ref<const ComplexVector>& x) {
    if (phi.rows() != x.size()) {
        fail(ErrorCode::Shape, "pseudoinverse_apply: modes have " + std::to_string(phi.rows()) +
                                   " rows but vector has " + std::to_string(x.size()));
    }
    if (phi.cols() == 0) fail(ErrorCode::DegenerateModes, "pseudoinverse_apply: no modes");
    if (!phi.allFinite() || !x.allFinite()) {
        fail(ErrorCode::NumericalFailure, "pseudoinverse_apply: non-finite input");
    }

    Eigen::BDCSVD<ComplexMatrix> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        fail(ErrorCode::NumericalFailure, "pseudoinverse_apply: no convergence for " + dims(phi.rows(), phi.cols()));
    }
    const Vector& sigma = svd.singularValues();
    if (sigma.size() == 0 || !(sigma(0) > 0.0)) {
        fail(ErrorCode::DegenerateModes, "pseudoinverse_apply: all singular values below cutoff");
    }
    const double cutoff = kPinvCutoff * sigma(0);
    ComplexVector coeffs = svd.matrixU().adjoint() * x;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        coeffs(i) = sigma(i) > cutoff ? coeffs(i) / sigma(i) : Complex{0.0, 0.0};
    }
    return svd.matrixV() * coeffs;
}

}  // namespace delaydmd
