#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gaussmeta/core.hpp"
#include "gaussmeta/estimators.hpp"

namespace gaussmeta {

struct EmIterationRecord {
  int iteration;
  double log_likelihood;
  double relative_change;
};

/// Noise-variance update of the M-step.
///   Pooled:         sum_i (|Y_i - X_i mu_i|^2 + tr(X_i Tau_i X_i^T)) / sum_i m_i,
///                   the maximizer of the expected complete log-likelihood.
///   PerTaskAverage: mean_i of the same per-task residual divided by m_i.
/// The two agree when every m_i is equal.
enum class NoiseUpdate { Pooled, PerTaskAverage };

struct EmConfig {
  /// Initial estimates; default_em_init(dataset) when empty.
  std::optional<Environment> init;
  double rel_tol = 1e-6;
  int max_iter = 1000;
  NoiseUpdate noise_update = NoiseUpdate::Pooled;
  /// Called once per completed iteration, in order.
  std::function<void(const EmIterationRecord&)> on_iteration;

  void validate() const;
};

struct EmTrace {
  int iterations = 0;
  /// J(E_1), J(E_2), ...: the starting point plus one entry per iteration.
  std::vector<double> log_likelihoods;
  std::vector<double> relative_changes;
  bool converged = false;
};

struct EmResult {
  Environment env;
  EmTrace trace;
};

/// alpha: pooled OLS (0 if the pooled Gram is singular); Sigma: I;
/// sigma2: residual variance of the per-task OLS fits over tasks with
/// m_i > d (1 when no such task exists or the estimate is not positive).
Environment default_em_init(const Dataset& ds);

std::vector<PosteriorParams> e_step(const Dataset& ds, const Environment& env_hat);

/// alpha = mean(mu_i);
/// Sigma = mean(Tau_i + (mu_i - alpha)(mu_i - alpha)^T);
/// sigma2 per NoiseUpdate.
/// Throws when any m_i == 0.
Environment m_step(const Dataset& ds, const std::vector<PosteriorParams>& posteriors,
                   NoiseUpdate noise_update = NoiseUpdate::Pooled);

/// max over (alpha, sigma2, Sigma) of |new - old| / (|old| + 1e-12),
/// Frobenius norm for Sigma.
double relative_change(const Environment& prev, const Environment& next);

/// Throws Error{Numerical} with the iteration index when sigma2 falls below
/// 1e-12 times the mean squared response (the data admit an exact fit and
/// the likelihood has no maximizer).
EmResult em_fit(const Dataset& ds, const EmConfig& cfg = {});

struct RankClipResult {
  MatrixXd Sigma;  ///< the d - s smallest eigenvalues zeroed
  MatrixXd basis;  ///< d x s, top eigenvectors scaled by sqrt(eigenvalue)
};

RankClipResult rank_clip(const MatrixXd& Sigma_hat, int s);

}  // namespace gaussmeta
