#pragma once

#include <variant>
#include <vector>

#include "gaussmeta/core.hpp"

namespace gaussmeta {

/// 16 sqrt(e), the gap between the unbiased and the universal lower bound.
double lower_bound_constant();

/// Coefficient of x^T M x in the high-probability lower bound,
/// 0.5 log(1 / (4 (1 - delta))). Negative for delta < 3/4; returned as is.
double lower_highprob_coefficient(double delta);

/// Coefficient of x^T M x in the high-probability upper bound, 2 log(2 / delta).
double upper_highprob_coefficient(double delta);

struct HighProbBound {
  double delta;
  double lower_coefficient;
  double upper_coefficient;
  double lower;  ///< holds with probability >= 1 - delta for every predictor
  double upper;  ///< holds with probability >= 1 - delta for the MLE plug-in
};

struct BoundReport {
  double xMx;
  double xTx;
  double sigma2;
  double expected_risk_mle;  ///< xMx + xTx + sigma2
  double lower_unbiased;     ///< equal to expected_risk_mle
  double lower_all;          ///< xMx / (16 sqrt e) + xTx + sigma2
  std::vector<HighProbBound> highprob;
};

/// M = sigma^4 (Sigma G_n + sigma2 I)^{-1} A^{-1} (G_n Sigma + sigma2 I)^{-1}
/// with G_n = X_n^T X_n for the last design and
/// A = sum_i X_i^T (X_i Sigma X_i^T + sigma2 I)^{-1} X_i.
/// Needs no inverse of Sigma. Throws Error{Singular} when A is singular.
MatrixXd matrix_M(std::span<const MatrixXd> designs, double sigma2, const MatrixXd& Sigma);
MatrixXd matrix_M(const Dataset& ds, double sigma2, const MatrixXd& Sigma);
/// The same M from a precomputed A and the target Gram G_n.
MatrixXd matrix_M_from_information(const MatrixXd& information, const MatrixXd& target_gram,
                                   double sigma2, const MatrixXd& Sigma);

/// Posterior covariance of the target (last) task.
MatrixXd target_posterior_covariance(std::span<const MatrixXd> designs, double sigma2,
                                     const MatrixXd& Sigma);

BoundReport bound_report(std::span<const MatrixXd> designs, double sigma2, const MatrixXd& Sigma,
                         const VectorXd& x, const std::vector<double>& deltas = {});
BoundReport bound_report(const Dataset& ds, double sigma2, const MatrixXd& Sigma,
                         const VectorXd& x, const std::vector<double>& deltas = {});

/// Isotropic design, X_i^T X_i = (m_i / d) I, with a spherical or a
/// low-rank task covariance given by its spectrum.
struct IsotropicSpec {
  int d = 1;
  std::vector<int> m;  ///< n sample sizes; the last one is the target's
  double sigma2 = 1.0;
  /// Either tau^2 (Sigma = tau^2 I) or the positive eigenvalues
  /// lambda_1 >= ... >= lambda_s > 0, s <= d.
  std::variant<double, std::vector<double>> spectrum = 1.0;

  int n() const noexcept { return static_cast<int>(m.size()); }
  int target_m() const { return m.back(); }
  void validate() const;
};

/// Harmonic mean of (z + d sigma2 / m_i), i = 1..n.
double harmonic_mean_shift(const IsotropicSpec& spec, double z);

/// Lower bound on (E[L(x)] - sigma2) / sigma2 for Sigma = tau^2 I:
///   (H / 16 sqrt e) d^2 sigma2 / (n (tau^2 m_n + d sigma2)^2) + d tau^2 / (tau^2 m_n + d sigma2),
/// scaled by |x|^2 (the displayed form assumes |x| = 1).
double spherical_isotropic_bound(const IsotropicSpec& spec, double norm_x = 1.0);

/// Low-rank counterpart; proj_norm2 = |P_s x|^2, equal to s/d in the
/// displayed form.
double lowrank_isotropic_bound(const IsotropicSpec& spec, double proj_norm2);

struct EigenFormulas {
  std::vector<double> sigma;  ///< lambda_j(Sigma), descending, zero-padded to d
  std::vector<double> M;      ///< lambda_j(M)
  std::vector<double> Tau;    ///< lambda_j(Tau)
};

EigenFormulas eigen_formulas(const IsotropicSpec& spec);

}  // namespace gaussmeta
