#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace gaussmeta {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Task distribution: theta_i ~ N(alpha, Sigma), label noise N(0, sigma2).
///
/// Construction validates the invariants (sigma2 > 0, Sigma symmetric PSD)
/// and caches a square-root factor F with F F^T = Sigma, which every
/// downstream solve uses in place of Sigma^{-1}.
class Environment {
 public:
  Environment(VectorXd alpha, double sigma2, MatrixXd sigma);

  const VectorXd& alpha() const noexcept { return alpha_; }
  double sigma2() const noexcept { return sigma2_; }
  const MatrixXd& Sigma() const noexcept { return sigma_; }
  const MatrixXd& sigma_factor() const noexcept { return factor_; }
  Index dim() const noexcept { return alpha_.size(); }

 private:
  VectorXd alpha_;
  double sigma2_;
  MatrixXd sigma_;
  MatrixXd factor_;
};

/// One task's fixed design and targets. Gram quantities are cached.
class TaskData {
 public:
  TaskData(MatrixXd x, VectorXd y);

  const MatrixXd& X() const noexcept { return x_; }
  const VectorXd& Y() const noexcept { return y_; }
  Index m() const noexcept { return x_.rows(); }
  Index d() const noexcept { return x_.cols(); }

  /// X^T X
  const MatrixXd& gram() const noexcept { return gram_; }
  /// X^T Y
  const VectorXd& xty() const noexcept { return xty_; }

 private:
  MatrixXd x_;
  VectorXd y_;
  MatrixXd gram_;
  VectorXd xty_;
};

/// Ordered tasks D_1..D_n sharing a column dimension; the last is the target.
class Dataset {
 public:
  explicit Dataset(std::vector<TaskData> tasks);

  std::size_t n() const noexcept { return tasks_.size(); }
  Index d() const noexcept { return tasks_.front().d(); }
  /// Cumulative sample size M.
  Index total_samples() const noexcept { return total_; }

  const TaskData& operator[](std::size_t i) const { return tasks_[i]; }
  const TaskData& target() const { return tasks_.back(); }
  const std::vector<TaskData>& tasks() const noexcept { return tasks_; }
  std::span<const TaskData> span() const noexcept { return tasks_; }

  auto begin() const noexcept { return tasks_.begin(); }
  auto end() const noexcept { return tasks_.end(); }

 private:
  std::vector<TaskData> tasks_;
  Index total_ = 0;
};

struct RowRange {
  Index begin;
  Index end;
  Index size() const noexcept { return end - begin; }
};

/// Stacked design Psi plus the per-task row ranges that describe the
/// block-diagonal structure of X and K.
struct AggregateDesign {
  MatrixXd Psi;
  std::vector<RowRange> task_offsets;
};

/// Throws Error{DimensionMismatch} naming the first task whose column count
/// differs from task 0, or Error{InvalidArgument} when the list is empty.
void check_uniform_dimension(std::span<const TaskData> tasks);

AggregateDesign build_aggregate(std::span<const TaskData> tasks);
inline AggregateDesign build_aggregate(const Dataset& ds) { return build_aggregate(ds.span()); }

/// Factorized diagonal block K_i = X_i F F^T X_i^T + sigma2 I, where F F^T = Sigma.
///
/// Picks the cheaper of two exact representations: a Cholesky of the
/// m_i x m_i block itself, or (when m_i exceeds rank(Sigma)) a Woodbury form
/// through the r x r capacitance matrix I + F^T X^T X F / sigma2.
class MarginalBlock {
 public:
  MarginalBlock(const TaskData& task, const MatrixXd& sigma_factor, double sigma2);

  double log_det() const noexcept { return log_det_; }
  /// K_i^{-1} v
  VectorXd solve(const VectorXd& v) const;
  /// X_i^T K_i^{-1} X_i
  MatrixXd xt_kinv_x() const;
  /// X_i^T K_i^{-1} v
  VectorXd xt_kinv(const VectorXd& v) const;
  /// r^T K_i^{-1} r
  double quad(const VectorXd& r) const;

 private:
  const TaskData* task_;
  const MatrixXd* factor_;
  double sigma2_;
  bool small_block_;
  Eigen::LLT<MatrixXd> llt_;
  double log_det_ = 0.0;
};

/// K^{-1} v, block by block; the M x M matrix K is never formed.
VectorXd apply_K_inverse(const Dataset& ds, const Environment& env, const VectorXd& v);

/// ln N(Y; Psi alpha, K) including the normalization constant.
double marginal_log_likelihood(const Dataset& ds, const Environment& env);

}  // namespace gaussmeta
