#include "gaussmeta/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gaussmeta/error.hpp"

namespace gaussmeta::linalg {

MatrixXd symmetrize(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

bool is_symmetric(const MatrixXd& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_psd(const MatrixXd& a) {
  if (!is_symmetric(a)) return false;
  if (a.size() == 0) return true;
  if (!a.allFinite()) return false;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double lmax = std::max(0.0, ev.maxCoeff());
  return ev.minCoeff() >= -1e-10 * lmax;
}

MatrixXd pseudo_inverse_psd(const MatrixXd& a, double rel_cutoff) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a));
  const VectorXd& ev = es.eigenvalues();
  const double cut = rel_cutoff * std::max(0.0, ev.maxCoeff());
  VectorXd inv = VectorXd::Zero(ev.size());
  for (Eigen::Index j = 0; j < ev.size(); ++j) {
    if (ev(j) > cut && ev(j) > 0.0) inv(j) = 1.0 / ev(j);
  }
  const MatrixXd& u = es.eigenvectors();
  return symmetrize(u * inv.asDiagonal() * u.transpose());
}

Eigen::Index psd_rank(const MatrixXd& a, double rel_cutoff) {
  if (a.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a), Eigen::EigenvaluesOnly);
  const VectorXd& ev = es.eigenvalues();
  const double lmax = ev.maxCoeff();
  if (lmax <= 0.0) return 0;
  return (ev.array() > rel_cutoff * lmax).count();
}

MatrixXd psd_factor(const MatrixXd& a) {
  const Eigen::Index d = a.rows();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a));
  const VectorXd& ev = es.eigenvalues();
  if (d == 0) return MatrixXd(0, 0);
  const double floor = static_cast<double>(d) * std::numeric_limits<double>::epsilon() * std::max(0.0, ev.maxCoeff());
  const Eigen::Index r = (ev.array() > floor).count();
  MatrixXd f(d, r);
  // Eigenvalues ascend, so the positive ones are the trailing r.
  for (Eigen::Index k = 0; k < r; ++k) {
    const Eigen::Index j = d - r + k;
    f.col(k) = es.eigenvectors().col(j) * std::sqrt(ev(j));
  }
  return f;
}

namespace {

Error singular_error(const MatrixXd& a) {
  Error e(ErrorKind::Singular, "matrix is not positive definite");
  e.with_rank(static_cast<std::size_t>(psd_rank(a)));
  return e;
}

// Cholesky can succeed on a numerically singular matrix with a tiny pivot;
// a suspicious pivot ratio falls back to an eigenvalue rank check.
Eigen::LLT<MatrixXd> checked_llt(const MatrixXd& a) {
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw singular_error(a);
  if (a.rows() > 0) {
    const VectorXd piv = llt.matrixLLT().diagonal().array().square();
    if (piv.minCoeff() < kPinvCutoff * piv.maxCoeff() &&
        psd_rank(a) < a.rows()) {
      throw singular_error(a);
    }
  }
  return llt;
}

}  // namespace

MatrixXd spd_solve(const MatrixXd& a, const MatrixXd& b) {
  return checked_llt(a).solve(b);
}

VectorXd spd_solve(const MatrixXd& a, const VectorXd& b) {
  return checked_llt(a).solve(b);
}

VectorXd min_norm_lstsq(const MatrixXd& x, const VectorXd& y) {
  if (x.rows() == 0) return VectorXd::Zero(x.cols());
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(x);
  return cod.solve(y);
}

MatrixXd orthonormal_basis(const MatrixXd& a) {
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU);
  const VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double tol = smax * std::max(a.rows(), a.cols()) *
                     Eigen::NumTraits<double>::epsilon();
  const Eigen::Index r = (sv.array() > tol).count();
  return svd.matrixU().leftCols(r);
}

}  // namespace gaussmeta::linalg
