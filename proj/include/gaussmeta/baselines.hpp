#pragma once

#include <cstdint>
#include <vector>

#include "gaussmeta/core.hpp"

namespace gaussmeta {

/// Random-search cross-validation for the biased-regression strength.
struct CvConfig {
  int n_folds = 10;
  /// Candidate count. With n_lambda >= 2 the first candidate is lambda = 0
  /// and the rest are log-uniform on [lambda_low, lambda_high].
  int n_lambda = 50;
  double lambda_low = 1e-3;
  double lambda_high = 100.0;
  int n_splits_per_task = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RepresentationBasis {
  MatrixXd B;  ///< d x s
  int s() const noexcept { return static_cast<int>(B.cols()); }
};

/// Least squares on one task; minimum-norm when X^T X is singular.
VectorXd ols(const TaskData& task);

/// (sum_i X_i^T X_i)^+ sum_i X_i^T Y_i over the given tasks.
VectorXd pooled_bias(std::span<const TaskData> tasks);
inline VectorXd pooled_bias(const Dataset& ds) { return pooled_bias(ds.span()); }

/// (X^T X + lambda I)^{-1} (X^T Y + lambda bias); OLS when lambda == 0.
VectorXd biased_regression(const TaskData& task, const VectorXd& bias, double lambda);

/// The candidate grid select_lambda searches, in evaluation order.
std::vector<double> lambda_candidates(const CvConfig& cfg);

struct LambdaSearch {
  double lambda;
  std::vector<double> candidates;
  std::vector<double> cv_loss;  ///< one per candidate
};

/// K-fold-over-tasks random search. Each held-out task is split
/// n_splits_per_task times into an adaptation set of min(target_m, m_i - 1)
/// rows and a test set of the rest; the biased ridge fit on the adaptation
/// set (bias from the other folds) is scored by test mean squared error.
/// Losses are averaged over splits, then over the evaluated tasks of each
/// fold, then over folds. The same splits are reused for every candidate.
/// Candidates within 1e-12 of the largest loss of the minimum count as tied;
/// the largest tied lambda wins.
LambdaSearch select_lambda_search(const Dataset& source_tasks, const CvConfig& cfg, int target_m);
double select_lambda(const Dataset& source_tasks, const CvConfig& cfg, int target_m);

/// Top-s eigenpairs of (1 / M) sum_i sum_j y_ij^2 x_ij x_ij^T, returned as
/// [D_11 u_1, ..., D_ss u_s].
RepresentationBasis mom_estimator(const Dataset& source_tasks, int s);

/// The y^2 x x^T moment matrix itself.
MatrixXd mom_moment_matrix(const Dataset& source_tasks);

/// Least squares on the projected features X B, mapped back as B w.
VectorXd oracle_representation(const TaskData& task, const RepresentationBasis& basis);

/// sqrt(1 - cos^2) where cos is the largest cosine between unit vectors of
/// span(A) and span(B).
double max_correlation(const MatrixXd& A, const MatrixXd& B);

}  // namespace gaussmeta
