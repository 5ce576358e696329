#pragma once

// Dense linear-algebra kernels shared by every other module. Storage is
// Eigen; the functions here pin down the conventions (sign, ordering,
// cutoffs) that Eigen itself leaves open.

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace delaydmd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct SvdResult {
    Matrix u;                // m x k, orthonormal columns
    Vector singular_values;  // k, descending
    Matrix v;                // n x k, orthonormal columns
};

struct EigResult {
    ComplexVector eigenvalues;
    ComplexMatrix eigenvectors;  // column j pairs with eigenvalues(j)
};

/// Relative cutoff below which singular values are treated as zero.
inline constexpr double kPinvCutoff = 1e-12;

bool all_finite(const Eigen::Ref<const Matrix>& a);

/// Thin SVD with k = min(m, n). Column signs are fixed so that the entry of
/// largest magnitude in each column of U is positive.
SvdResult thin_svd(const Eigen::Ref<const Matrix>& a);

/// Eigendecomposition of a small dense matrix. Eigenvalues are ordered by
/// descending modulus, ties broken by descending imaginary part; eigenvectors
/// have unit 2-norm. Real input yields exact conjugate pairs.
EigResult eig_dense(const Eigen::Ref<const Matrix>& a);
EigResult eig_dense(const Eigen::Ref<const ComplexMatrix>& a);

/// Least-squares solve min ||phi * b - x||_2 through the SVD of phi.
ComplexVector pseudoinverse_apply(const Eigen::Ref<const ComplexMatrix>& phi,
                                  const Eigen::Ref<const ComplexVector>& x);

/// Total order used for every spectrum the library emits.
bool eigen_order_less(const Complex& a, const Complex& b);

}  // namespace delaydmd
