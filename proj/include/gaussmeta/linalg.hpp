#pragma once

#include <Eigen/Dense>

namespace gaussmeta::linalg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Relative eigenvalue cutoff below which a PSD matrix is treated as singular.
inline constexpr double kPinvCutoff = 1e-10;

/// (A + A^T) / 2.
MatrixXd symmetrize(const MatrixXd& a);

bool is_symmetric(const MatrixXd& a, double rel_tol = 1e-12);

/// Symmetric within 1e-12 relative and every eigenvalue >= -1e-10 * lambda_max.
bool is_psd(const MatrixXd& a);

/// Moore-Penrose inverse of a symmetric PSD matrix by eigendecomposition;
/// eigenvalues below kPinvCutoff * lambda_max are treated as zero.
MatrixXd pseudo_inverse_psd(const MatrixXd& a, double rel_cutoff = kPinvCutoff);

/// Numerical rank of a symmetric PSD matrix under the same cutoff.
Eigen::Index psd_rank(const MatrixXd& a, double rel_cutoff = kPinvCutoff);

/// A d x r factor F with F F^T = A for symmetric PSD A. Negative rounding
/// noise in the spectrum is clipped to zero; exactly-zero directions are
/// dropped, so r is the number of strictly positive eigenvalues.
MatrixXd psd_factor(const MatrixXd& a);

/// Solves A X = B for symmetric positive-definite A. Throws Error{Singular}
/// (with the numerical rank attached) when A is not positive definite.
MatrixXd spd_solve(const MatrixXd& a, const MatrixXd& b);
VectorXd spd_solve(const MatrixXd& a, const VectorXd& b);

/// Minimum-norm least-squares solution of X w = y.
VectorXd min_norm_lstsq(const MatrixXd& x, const VectorXd& y);

/// Orthonormal basis of the column space (rank-revealing).
MatrixXd orthonormal_basis(const MatrixXd& a);

}  // namespace gaussmeta::linalg
