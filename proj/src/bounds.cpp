#include "gaussmeta/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gaussmeta/error.hpp"
#include "gaussmeta/estimators.hpp"
#include "gaussmeta/linalg.hpp"

namespace gaussmeta {

double lower_bound_constant() { return 16.0 * std::exp(0.5); }

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "delta must lie in (0, 1), got " + std::to_string(delta));
  }
}

std::vector<TaskData> as_tasks(std::span<const MatrixXd> designs) {
  std::vector<TaskData> tasks;
  tasks.reserve(designs.size());
  for (const MatrixXd& x : designs) tasks.emplace_back(x, VectorXd::Zero(x.rows()));
  return tasks;
}

std::vector<MatrixXd> designs_of(const Dataset& ds) {
  std::vector<MatrixXd> out;
  out.reserve(ds.n());
  for (const TaskData& t : ds) out.push_back(t.X());
  return out;
}

}  // namespace

double lower_highprob_coefficient(double delta) {
  check_delta(delta);
  return 0.5 * std::log(1.0 / (4.0 * (1.0 - delta)));
}

double upper_highprob_coefficient(double delta) {
  check_delta(delta);
  return 2.0 * std::log(2.0 / delta);
}

MatrixXd matrix_M_from_information(const MatrixXd& information, const MatrixXd& target_gram,
                                   double sigma2, const MatrixXd& Sigma) {
  const Index d = information.rows();
  if (information.cols() != d || target_gram.rows() != d || target_gram.cols() != d ||
      Sigma.rows() != d || Sigma.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, "information, target Gram and Sigma must share dimension");
  }
  const MatrixXd a_inv = linalg::spd_solve(linalg::symmetrize(information), MatrixXd(MatrixXd::Identity(d, d)));

  // (Sigma G_n + sigma2 I)^{-1} = Tau Sigma^{-1} / sigma2; its transpose sits on the right.
  MatrixXd left = linalg::symmetrize(Sigma) * target_gram;
  left.diagonal().array() += sigma2;
  const Eigen::PartialPivLU<MatrixXd> lu(left);
  const MatrixXd p = lu.solve(MatrixXd::Identity(d, d));
  return linalg::symmetrize(sigma2 * sigma2 * p * a_inv * p.transpose());
}

MatrixXd matrix_M(std::span<const MatrixXd> designs, double sigma2, const MatrixXd& Sigma) {
  if (designs.empty()) throw Error(ErrorKind::InvalidArgument, "no designs");
  const std::vector<TaskData> tasks = as_tasks(designs);
  return matrix_M_from_information(alpha_information(tasks, sigma2, Sigma), tasks.back().gram(),
                                   sigma2, Sigma);
}

MatrixXd matrix_M(const Dataset& ds, double sigma2, const MatrixXd& Sigma) {
  const auto designs = designs_of(ds);
  return matrix_M(designs, sigma2, Sigma);
}

MatrixXd target_posterior_covariance(std::span<const MatrixXd> designs, double sigma2,
                                     const MatrixXd& Sigma) {
  if (designs.empty()) throw Error(ErrorKind::InvalidArgument, "no designs");
  const PosteriorSolver solver(VectorXd::Zero(Sigma.rows()), sigma2, Sigma);
  return solver.covariance(designs.back());
}

BoundReport bound_report(std::span<const MatrixXd> designs, double sigma2, const MatrixXd& Sigma,
                         const VectorXd& x, const std::vector<double>& deltas) {
  for (double delta : deltas) check_delta(delta);
  if (x.size() != Sigma.rows()) throw Error(ErrorKind::DimensionMismatch, "query dimension differs from Sigma");
  const MatrixXd m = matrix_M(designs, sigma2, Sigma);
  const MatrixXd tau = target_posterior_covariance(designs, sigma2, Sigma);

  BoundReport r;
  r.xMx = std::max(0.0, x.dot(m * x));
  r.xTx = std::max(0.0, x.dot(tau * x));
  r.sigma2 = sigma2;
  r.expected_risk_mle = r.xMx + r.xTx + sigma2;
  r.lower_unbiased = r.expected_risk_mle;
  r.lower_all = r.xMx / lower_bound_constant() + r.xTx + sigma2;
  for (double delta : deltas) {
    HighProbBound hp;
    hp.delta = delta;
    hp.lower_coefficient = lower_highprob_coefficient(delta);
    hp.upper_coefficient = upper_highprob_coefficient(delta);
    hp.lower = hp.lower_coefficient * r.xMx + r.xTx + sigma2;
    hp.upper = hp.upper_coefficient * r.xMx + r.xTx + sigma2;
    r.highprob.push_back(hp);
  }
  return r;
}

BoundReport bound_report(const Dataset& ds, double sigma2, const MatrixXd& Sigma,
                         const VectorXd& x, const std::vector<double>& deltas) {
  const auto designs = designs_of(ds);
  return bound_report(designs, sigma2, Sigma, x, deltas);
}

void IsotropicSpec::validate() const {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "d must be positive");
  if (m.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one task");
  for (int mi : m) {
    if (mi < 1) throw Error(ErrorKind::InvalidArgument, "sample sizes must be positive");
  }
  if (!(sigma2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma2 must be positive");
  if (const auto* tau2 = std::get_if<double>(&spectrum)) {
    if (!(*tau2 >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tau2 must be nonnegative");
    return;
  }
  const auto& ev = std::get<std::vector<double>>(spectrum);
  if (ev.empty() || static_cast<int>(ev.size()) > d) {
    throw Error(ErrorKind::InvalidArgument, "rank must satisfy 1 <= s <= d");
  }
  for (std::size_t j = 0; j < ev.size(); ++j) {
    if (!(ev[j] > 0.0)) throw Error(ErrorKind::InvalidArgument, "eigenvalues must be positive");
    if (j > 0 && ev[j] > ev[j - 1]) throw Error(ErrorKind::InvalidArgument, "eigenvalues must be sorted descending");
  }
}

double harmonic_mean_shift(const IsotropicSpec& spec, double z) {
  double acc = 0.0;
  for (int mi : spec.m) acc += 1.0 / (z + spec.d * spec.sigma2 / mi);
  return spec.n() / acc;
}

double spherical_isotropic_bound(const IsotropicSpec& spec, double norm_x) {
  spec.validate();
  const auto* tau2p = std::get_if<double>(&spec.spectrum);
  if (!tau2p) throw Error(ErrorKind::InvalidArgument, "the spherical closed form needs a spherical spectrum");
  const double tau2 = *tau2p;
  const double d = spec.d;
  const double s2 = spec.sigma2;
  const double denom = tau2 * spec.target_m() + d * s2;
  const double h = harmonic_mean_shift(spec, tau2);
  const double estimation = h / lower_bound_constant() * d * d * s2 / (spec.n() * denom * denom);
  const double posterior = d * tau2 / denom;
  return (estimation + posterior) * norm_x * norm_x;
}

double lowrank_isotropic_bound(const IsotropicSpec& spec, double proj_norm2) {
  spec.validate();
  const auto* evp = std::get_if<std::vector<double>>(&spec.spectrum);
  if (!evp) throw Error(ErrorKind::InvalidArgument, "the low-rank closed form needs an eigenvalue spectrum");
  const double l1 = evp->front();
  const double ls = evp->back();
  const double d = spec.d;
  const double s2 = spec.sigma2;
  const double mn = spec.target_m();
  const double h = harmonic_mean_shift(spec, ls);
  const double top = l1 * mn + d * s2;
  const double estimation = h / lower_bound_constant() * d * d * s2 * proj_norm2 / (spec.n() * top * top);
  const double posterior = d * ls * proj_norm2 / (ls * mn + d * s2);
  return estimation + posterior;
}

EigenFormulas eigen_formulas(const IsotropicSpec& spec) {
  spec.validate();
  EigenFormulas out;
  if (const auto* tau2 = std::get_if<double>(&spec.spectrum)) {
    out.sigma.assign(spec.d, *tau2);
  } else {
    out.sigma = std::get<std::vector<double>>(spec.spectrum);
    out.sigma.resize(spec.d, 0.0);
  }
  const double d = spec.d;
  const double s2 = spec.sigma2;
  const double mn = spec.target_m();
  for (double lam : out.sigma) {
    const double denom = mn * lam + d * s2;
    out.M.push_back(s2 * s2 * d * d / (denom * denom) * harmonic_mean_shift(spec, lam) / spec.n());
    out.Tau.push_back(d * s2 * lam / (d * s2 + mn * lam));
  }
  return out;
}

}  // namespace gaussmeta
