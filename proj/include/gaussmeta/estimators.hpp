#pragma once

#include "gaussmeta/core.hpp"

namespace gaussmeta {

/// Posterior N(mu, Tau) of a task's parameter given its data and the prior.
struct PosteriorParams {
  VectorXd mu;
  MatrixXd Tau;
};

/// Bias b, weighting Gamma and strength lambda of weighted biased
/// regularized least squares.
struct WbrlsConfig {
  VectorXd b;
  MatrixXd Gamma;
  double lambda = 0.0;
};

/// Posterior of theta under the prior N(alpha, Sigma) with noise sigma2.
///
/// Evaluated without inverting Sigma:
///   Tau = F (I + F^T X^T X F / sigma2)^{-1} F^T,   F F^T = Sigma,
///   mu  = alpha + Tau X^T (Y - X alpha) / sigma2,
/// or, when the task has fewer rows than rank(Sigma), through the m x m
/// system C = X Sigma X^T + sigma2 I. Both equal (Sigma^{-1} + X^T X/sigma2)^{-1}
/// for full-rank Sigma. For rank-deficient Sigma the posterior is confined to
/// alpha + range(Sigma), the limit of the full-rank formula.
class PosteriorSolver {
 public:
  PosteriorSolver(VectorXd alpha, double sigma2, MatrixXd sigma);
  explicit PosteriorSolver(const Environment& env);

  PosteriorParams operator()(const TaskData& task) const;
  /// Tau only; it does not depend on Y.
  MatrixXd covariance(const MatrixXd& x) const;

  const VectorXd& alpha() const noexcept { return alpha_; }
  double sigma2() const noexcept { return sigma2_; }
  const MatrixXd& Sigma() const noexcept { return sigma_; }

 private:
  PosteriorParams solve(const MatrixXd& x, const MatrixXd& gram, const VectorXd* y,
                        const VectorXd* xty) const;

  VectorXd alpha_;
  double sigma2_;
  MatrixXd sigma_;
  MatrixXd factor_;
};

PosteriorParams posterior_params(const TaskData& task, const VectorXd& alpha, double sigma2,
                                 const MatrixXd& Sigma);

/// theta_hat(a): the posterior mean evaluated with meta-mean a.
VectorXd plug_in_theta(const VectorXd& a, const TaskData& task, double sigma2,
                       const MatrixXd& Sigma);

/// Psi^T K^{-1} Psi and Psi^T K^{-1} Y. Sums over disjoint task sets add.
struct AlphaNormalEquations {
  MatrixXd information;
  VectorXd score;

  AlphaNormalEquations& operator+=(const AlphaNormalEquations& other);
  /// The maximizer; throws Error{Singular} with the rank when information is singular.
  VectorXd solve() const;
};

AlphaNormalEquations alpha_normal_equations(std::span<const TaskData> tasks, double sigma2,
                                            const MatrixXd& Sigma);

/// MLE of the meta-mean, (Psi^T K^{-1} Psi)^{-1} Psi^T K^{-1} Y, accumulated
/// block by block. Throws Error{Singular} with the rank of Psi^T K^{-1} Psi
/// when the pooled design does not span R^d.
VectorXd mle_alpha(const Dataset& ds, double sigma2, const MatrixXd& Sigma);

/// Psi^T K^{-1} Psi, the Fisher information of alpha.
MatrixXd alpha_information(std::span<const TaskData> tasks, double sigma2, const MatrixXd& Sigma);

/// (X^T X + lambda Gamma)^{-1} (X^T Y + lambda Gamma b)
VectorXd wbrls(const TaskData& task, const WbrlsConfig& cfg);

/// A meta-mean alpha such that x^T plug_in_theta(alpha, ...) == pred_value.
/// Uses Sigma Tau^{-1} = I + Sigma X^T X / sigma2, so Sigma need not be
/// invertible. Throws on x == 0.
VectorXd alpha_for_prediction(double pred_value, const VectorXd& x, const TaskData& task,
                              double sigma2, const MatrixXd& Sigma);

double predict(const VectorXd& theta, const VectorXd& x);

}  // namespace gaussmeta
