#pragma once

#include <Eigen/Dense>

namespace flmgof::linalg {

/// Relative cutoff below which symmetric eigenvalues are treated as zero in
/// square roots and inverses.
inline constexpr double kSpectralClip = 1e-12;

struct SymmetricEigen {
    Eigen::VectorXd values;  // descending
    Eigen::MatrixXd vectors; // columns match `values`
};

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// descending order. Only the lower triangle is read.
SymmetricEigen eigen_descending(const Eigen::MatrixXd& a);

/// Symmetric PSD square root; eigenvalues below kSpectralClip * max are
/// dropped (negative ones included).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a);

/// Moore-Penrose inverse of a symmetric PSD matrix with the same clipping.
Eigen::MatrixXd psd_pinv(const Eigen::MatrixXd& a);

/// Number of eigenvalues above kSpectralClip * max.
Eigen::Index numeric_rank(const Eigen::MatrixXd& a);

/// W^{1/2} A W^{1/2}: the symmetric matrix of the integral operator with
/// kernel A under the quadrature-weighted inner product.
Eigen::MatrixXd weighted_form(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& sqrt_weights);

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

} // namespace flmgof::linalg
