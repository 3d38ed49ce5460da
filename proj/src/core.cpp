#include "gaussmeta/core.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gaussmeta/error.hpp"
#include "gaussmeta/linalg.hpp"

namespace gaussmeta {

Environment::Environment(VectorXd alpha, double sigma2, MatrixXd sigma)
    : alpha_(std::move(alpha)), sigma2_(sigma2), sigma_(std::move(sigma)) {
  if (!(sigma2_ > 0.0) || !std::isfinite(sigma2_)) {
    throw Error(ErrorKind::InvalidArgument, "sigma2 must be positive and finite");
  }
  if (sigma_.rows() != alpha_.size() || sigma_.cols() != alpha_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "Sigma must be d x d with d = len(alpha)");
  }
  if (!alpha_.allFinite()) throw Error(ErrorKind::InvalidArgument, "alpha is not finite");
  if (!linalg::is_psd(sigma_)) {
    throw Error(ErrorKind::NotPositiveDefinite, "Sigma is not symmetric positive semi-definite");
  }
  sigma_ = linalg::symmetrize(sigma_);
  factor_ = linalg::psd_factor(sigma_);
}

TaskData::TaskData(MatrixXd x, VectorXd y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.rows() != y_.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "design has " + std::to_string(x_.rows()) + " rows but " +
                    std::to_string(y_.size()) + " targets");
  }
  gram_ = x_.transpose() * x_;
  xty_ = x_.transpose() * y_;
}

void check_uniform_dimension(std::span<const TaskData> tasks) {
  if (tasks.empty()) throw Error(ErrorKind::InvalidArgument, "dataset has no tasks");
  const Index d = tasks.front().d();
  for (std::size_t i = 1; i < tasks.size(); ++i) {
    if (tasks[i].d() != d) {
      Error e(ErrorKind::DimensionMismatch,
              "task " + std::to_string(i) + " has " + std::to_string(tasks[i].d()) +
                  " columns, expected " + std::to_string(d));
      throw e.with_task(i);
    }
  }
}

Dataset::Dataset(std::vector<TaskData> tasks) : tasks_(std::move(tasks)) {
  check_uniform_dimension(tasks_);
  for (const auto& t : tasks_) total_ += t.m();
}

AggregateDesign build_aggregate(std::span<const TaskData> tasks) {
  check_uniform_dimension(tasks);
  Index total = 0;
  for (const auto& t : tasks) total += t.m();
  AggregateDesign out;
  out.Psi.resize(total, tasks.front().d());
  out.task_offsets.reserve(tasks.size());
  Index row = 0;
  for (const auto& t : tasks) {
    out.Psi.middleRows(row, t.m()) = t.X();
    out.task_offsets.push_back({row, row + t.m()});
    row += t.m();
  }
  return out;
}

MarginalBlock::MarginalBlock(const TaskData& task, const MatrixXd& sigma_factor, double sigma2)
    : task_(&task), factor_(&sigma_factor), sigma2_(sigma2) {
  const Index m = task.m();
  const Index r = sigma_factor.cols();
  small_block_ = m <= r;
  if (small_block_) {
    const MatrixXd xf = task.X() * sigma_factor;
    MatrixXd k = xf * xf.transpose();
    k.diagonal().array() += sigma2;
    llt_.compute(k);
  } else {
    MatrixXd s = sigma_factor.transpose() * task.gram() * sigma_factor / sigma2;
    s = linalg::symmetrize(s);
    s.diagonal().array() += 1.0;
    llt_.compute(s);
  }
  if (llt_.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "marginal covariance block is not positive definite");
  }
  log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  if (!small_block_) log_det_ += static_cast<double>(m) * std::log(sigma2);
}

VectorXd MarginalBlock::solve(const VectorXd& v) const {
  if (small_block_) return llt_.solve(v);
  const MatrixXd& x = task_->X();
  const VectorXd w = factor_->transpose() * (x.transpose() * v);
  return (v - x * (*factor_ * llt_.solve(w)) / sigma2_) / sigma2_;
}

MatrixXd MarginalBlock::xt_kinv_x() const {
  if (small_block_) return linalg::symmetrize(task_->X().transpose() * llt_.solve(task_->X()));
  const MatrixXd& g = task_->gram();
  const MatrixXd gf = g * *factor_;
  const MatrixXd out = (g - gf * llt_.solve(gf.transpose()) / sigma2_) / sigma2_;
  return linalg::symmetrize(out);
}

VectorXd MarginalBlock::xt_kinv(const VectorXd& v) const {
  if (small_block_) return task_->X().transpose() * llt_.solve(v);
  const VectorXd xv = task_->X().transpose() * v;
  const MatrixXd gf = task_->gram() * *factor_;
  return (xv - gf * llt_.solve(factor_->transpose() * xv) / sigma2_) / sigma2_;
}

double MarginalBlock::quad(const VectorXd& r) const {
  if (small_block_) return r.dot(llt_.solve(r));
  const VectorXd w = factor_->transpose() * (task_->X().transpose() * r);
  return (r.squaredNorm() - w.dot(llt_.solve(w)) / sigma2_) / sigma2_;
}

VectorXd apply_K_inverse(const Dataset& ds, const Environment& env, const VectorXd& v) {
  if (env.dim() != ds.d()) throw Error(ErrorKind::DimensionMismatch, "environment dimension differs from dataset");
  if (v.size() != ds.total_samples()) throw Error(ErrorKind::DimensionMismatch, "vector length differs from M");
  VectorXd out(v.size());
  Index row = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const TaskData& t = ds[i];
    if (t.m() > 0) {
      MarginalBlock block(t, env.sigma_factor(), env.sigma2());
      out.segment(row, t.m()) = block.solve(v.segment(row, t.m()));
    }
    row += t.m();
  }
  return out;
}

double marginal_log_likelihood(const Dataset& ds, const Environment& env) {
  if (env.dim() != ds.d()) throw Error(ErrorKind::DimensionMismatch, "environment dimension differs from dataset");
  if (ds.total_samples() < 1) throw Error(ErrorKind::InvalidArgument, "dataset has no samples");
  const double log2pi = std::log(2.0 * std::numbers::pi);
  double ll = 0.0;
  for (const TaskData& t : ds) {
    if (t.m() == 0) continue;
    MarginalBlock block(t, env.sigma_factor(), env.sigma2());
    const VectorXd r = t.Y() - t.X() * env.alpha();
    ll -= 0.5 * (static_cast<double>(t.m()) * log2pi + block.log_det() + block.quad(r));
  }
  return ll;
}

}  // namespace gaussmeta
