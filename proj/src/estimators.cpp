#include "gaussmeta/estimators.hpp"

#include <cmath>

#include "gaussmeta/error.hpp"
#include "gaussmeta/linalg.hpp"

namespace gaussmeta {

namespace {

void check_prior(const VectorXd& alpha, double sigma2, const MatrixXd& sigma) {
  if (!(sigma2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma2 must be positive");
  if (sigma.rows() != alpha.size() || sigma.cols() != alpha.size()) {
    throw Error(ErrorKind::DimensionMismatch, "Sigma must be d x d");
  }
  if (!linalg::is_psd(sigma)) {
    throw Error(ErrorKind::NotPositiveDefinite, "Sigma is not symmetric PSD");
  }
}

}  // namespace

PosteriorSolver::PosteriorSolver(VectorXd alpha, double sigma2, MatrixXd sigma)
    : alpha_(std::move(alpha)), sigma2_(sigma2), sigma_(std::move(sigma)) {
  check_prior(alpha_, sigma2_, sigma_);
  sigma_ = linalg::symmetrize(sigma_);
  factor_ = linalg::psd_factor(sigma_);
}

PosteriorSolver::PosteriorSolver(const Environment& env)
    : alpha_(env.alpha()), sigma2_(env.sigma2()), sigma_(env.Sigma()), factor_(env.sigma_factor()) {}

PosteriorParams PosteriorSolver::operator()(const TaskData& task) const {
  if (task.d() != alpha_.size()) throw Error(ErrorKind::DimensionMismatch, "task dimension differs from prior");
  return solve(task.X(), task.gram(), &task.Y(), &task.xty());
}

MatrixXd PosteriorSolver::covariance(const MatrixXd& x) const {
  if (x.cols() != alpha_.size()) throw Error(ErrorKind::DimensionMismatch, "design dimension differs from prior");
  const MatrixXd gram = x.transpose() * x;
  return solve(x, gram, nullptr, nullptr).Tau;
}

PosteriorParams PosteriorSolver::solve(const MatrixXd& x, const MatrixXd& gram, const VectorXd* y,
                                       const VectorXd* xty) const {
  PosteriorParams out;
  const Index m = x.rows();
  const Index r = factor_.cols();
  if (m == 0) {
    out.Tau = sigma_;
    out.mu = alpha_;
    return out;
  }
  if (m < r) {
    // Woodbury through the m x m marginal block.
    const MatrixXd xf = x * factor_;
    MatrixXd c = xf * xf.transpose();
    c.diagonal().array() += sigma2_;
    Eigen::LLT<MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "posterior block solve failed");
    const MatrixXd xs = x * sigma_;  // m x d
    const MatrixXd w = llt.solve(xs);
    out.Tau = linalg::symmetrize(sigma_ - xs.transpose() * w);
    if (y) out.mu = alpha_ + w.transpose() * (*y - x * alpha_);
  } else {
    MatrixXd s = linalg::symmetrize(factor_.transpose() * gram * factor_ / sigma2_);
    s.diagonal().array() += 1.0;
    Eigen::LLT<MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "posterior capacitance solve failed");
    out.Tau = linalg::symmetrize(factor_ * llt.solve(factor_.transpose()));
    if (xty) out.mu = alpha_ + out.Tau * (*xty - gram * alpha_) / sigma2_;
  }
  return out;
}

PosteriorParams posterior_params(const TaskData& task, const VectorXd& alpha, double sigma2,
                                 const MatrixXd& Sigma) {
  return PosteriorSolver(alpha, sigma2, Sigma)(task);
}

VectorXd plug_in_theta(const VectorXd& a, const TaskData& task, double sigma2, const MatrixXd& Sigma) {
  return PosteriorSolver(a, sigma2, Sigma)(task).mu;
}

MatrixXd alpha_information(std::span<const TaskData> tasks, double sigma2, const MatrixXd& Sigma) {
  check_uniform_dimension(tasks);
  const Index d = tasks.front().d();
  check_prior(VectorXd::Zero(d), sigma2, Sigma);
  const MatrixXd factor = linalg::psd_factor(linalg::symmetrize(Sigma));
  MatrixXd a = MatrixXd::Zero(d, d);
  for (const TaskData& t : tasks) {
    if (t.m() == 0) continue;
    a += MarginalBlock(t, factor, sigma2).xt_kinv_x();
  }
  return linalg::symmetrize(a);
}

AlphaNormalEquations alpha_normal_equations(std::span<const TaskData> tasks, double sigma2,
                                            const MatrixXd& Sigma) {
  check_uniform_dimension(tasks);
  const Index d = tasks.front().d();
  check_prior(VectorXd::Zero(d), sigma2, Sigma);
  const MatrixXd factor = linalg::psd_factor(linalg::symmetrize(Sigma));
  AlphaNormalEquations out{MatrixXd::Zero(d, d), VectorXd::Zero(d)};
  for (const TaskData& t : tasks) {
    if (t.m() == 0) continue;
    MarginalBlock block(t, factor, sigma2);
    out.information += block.xt_kinv_x();
    out.score += block.xt_kinv(t.Y());
  }
  out.information = linalg::symmetrize(out.information);
  return out;
}

AlphaNormalEquations& AlphaNormalEquations::operator+=(const AlphaNormalEquations& other) {
  information += other.information;
  score += other.score;
  return *this;
}

VectorXd AlphaNormalEquations::solve() const {
  return linalg::spd_solve(linalg::symmetrize(information), score);
}

VectorXd mle_alpha(const Dataset& ds, double sigma2, const MatrixXd& Sigma) {
  return alpha_normal_equations(ds.span(), sigma2, Sigma).solve();
}

VectorXd wbrls(const TaskData& task, const WbrlsConfig& cfg) {
  const Index d = task.d();
  if (cfg.b.size() != d || cfg.Gamma.rows() != d || cfg.Gamma.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, "WBRLS bias/weighting dimension differs from task");
  }
  if (!(cfg.lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be nonnegative");
  const MatrixXd lhs = linalg::symmetrize(task.gram() + cfg.lambda * cfg.Gamma);
  const VectorXd rhs = task.xty() + cfg.lambda * (cfg.Gamma * cfg.b);
  return linalg::spd_solve(lhs, rhs);
}

VectorXd alpha_for_prediction(double pred_value, const VectorXd& x, const TaskData& task,
                              double sigma2, const MatrixXd& Sigma) {
  const Index d = task.d();
  if (x.size() != d) throw Error(ErrorKind::DimensionMismatch, "query dimension differs from task");
  const double xx = x.squaredNorm();
  if (xx == 0.0) throw Error(ErrorKind::InvalidArgument, "query point must be nonzero");
  PosteriorSolver solver(VectorXd::Zero(d), sigma2, Sigma);
  // With a = 0 the plug-in mean is Tau X^T Y / sigma2.
  const double data_part = x.dot(solver(task).mu);
  const double c = (pred_value - data_part) / xx;
  const VectorXd sigma_tau_inv_x = x + solver.Sigma() * (task.gram() * x) / sigma2;
  return sigma_tau_inv_x * c;
}

double predict(const VectorXd& theta, const VectorXd& x) {
  if (theta.size() != x.size()) throw Error(ErrorKind::DimensionMismatch, "theta and x differ in length");
  return theta.dot(x);
}

}  // namespace gaussmeta
