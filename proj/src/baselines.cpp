#include "gaussmeta/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "gaussmeta/error.hpp"
#include "gaussmeta/linalg.hpp"

namespace gaussmeta {

void CvConfig::validate() const {
  if (n_folds < 2) throw Error(ErrorKind::InvalidArgument, "n_folds must be at least 2");
  if (n_lambda < 1) throw Error(ErrorKind::InvalidArgument, "n_lambda must be at least 1");
  if (n_splits_per_task < 1) throw Error(ErrorKind::InvalidArgument, "n_splits_per_task must be at least 1");
  if (!(lambda_low > 0.0 && lambda_high > lambda_low)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 < lambda_low < lambda_high");
  }
}

VectorXd ols(const TaskData& task) { return linalg::min_norm_lstsq(task.X(), task.Y()); }

VectorXd pooled_bias(std::span<const TaskData> tasks) {
  check_uniform_dimension(tasks);
  const Index d = tasks.front().d();
  MatrixXd gram = MatrixXd::Zero(d, d);
  VectorXd xty = VectorXd::Zero(d);
  for (const TaskData& t : tasks) {
    gram += t.gram();
    xty += t.xty();
  }
  return linalg::pseudo_inverse_psd(gram) * xty;
}

namespace {

VectorXd ridge(const MatrixXd& gram, const VectorXd& xty, const VectorXd& bias, double lambda,
               const MatrixXd& x, const VectorXd& y) {
  if (lambda == 0.0) return linalg::min_norm_lstsq(x, y);
  MatrixXd lhs = gram;
  lhs.diagonal().array() += lambda;
  return Eigen::LLT<MatrixXd>(lhs).solve(xty + lambda * bias);
}

struct HeldOutSplit {
  MatrixXd x_adapt;
  VectorXd y_adapt;
  MatrixXd gram_adapt;
  VectorXd xty_adapt;
  MatrixXd x_test;
  VectorXd y_test;
};

}  // namespace

VectorXd biased_regression(const TaskData& task, const VectorXd& bias, double lambda) {
  if (bias.size() != task.d()) throw Error(ErrorKind::DimensionMismatch, "bias dimension differs from task");
  if (!(lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be nonnegative");
  return ridge(task.gram(), task.xty(), bias, lambda, task.X(), task.Y());
}

std::vector<double> lambda_candidates(const CvConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(std::log(cfg.lambda_low), std::log(cfg.lambda_high));
  std::vector<double> out;
  out.reserve(cfg.n_lambda);
  if (cfg.n_lambda >= 2) out.push_back(0.0);
  while (static_cast<int>(out.size()) < cfg.n_lambda) out.push_back(std::exp(unif(rng)));
  return out;
}

LambdaSearch select_lambda_search(const Dataset& source_tasks, const CvConfig& cfg, int target_m) {
  cfg.validate();
  if (target_m < 1) throw Error(ErrorKind::InvalidArgument, "target_m must be positive");
  const std::size_t n = source_tasks.n();
  const std::size_t k_folds = static_cast<std::size_t>(cfg.n_folds);
  if (n < k_folds) {
    throw Error(ErrorKind::InvalidArgument, "fewer source tasks (" + std::to_string(n) +
                                                ") than folds; a group would be empty");
  }
  const Index d = source_tasks.d();

  std::seed_seq seq{cfg.seed, std::uint64_t{0x5e1ec7}};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> groups(k_folds);
  for (std::size_t j = 0; j < n; ++j) groups[j % k_folds].push_back(order[j]);

  MatrixXd gram_all = MatrixXd::Zero(d, d);
  VectorXd xty_all = VectorXd::Zero(d);
  for (const TaskData& t : source_tasks) {
    gram_all += t.gram();
    xty_all += t.xty();
  }

  // Biases and splits are fixed up front so every candidate sees the same data.
  std::vector<VectorXd> biases(k_folds);
  std::vector<std::vector<std::vector<HeldOutSplit>>> splits(k_folds);
  for (std::size_t k = 0; k < k_folds; ++k) {
    MatrixXd gram = gram_all;
    VectorXd xty = xty_all;
    for (std::size_t i : groups[k]) {
      gram -= source_tasks[i].gram();
      xty -= source_tasks[i].xty();
    }
    biases[k] = linalg::pseudo_inverse_psd(linalg::symmetrize(gram)) * xty;

    for (std::size_t i : groups[k]) {
      const TaskData& t = source_tasks[i];
      if (t.m() < 2) continue;
      const Index a = std::max<Index>(1, std::min<Index>(target_m, t.m() - 1));
      std::vector<HeldOutSplit> per_task;
      std::vector<Index> rows(t.m());
      for (int l = 0; l < cfg.n_splits_per_task; ++l) {
        std::iota(rows.begin(), rows.end(), Index{0});
        std::shuffle(rows.begin(), rows.end(), rng);
        HeldOutSplit sp;
        sp.x_adapt.resize(a, d);
        sp.y_adapt.resize(a);
        sp.x_test.resize(t.m() - a, d);
        sp.y_test.resize(t.m() - a);
        for (Index r = 0; r < t.m(); ++r) {
          if (r < a) {
            sp.x_adapt.row(r) = t.X().row(rows[r]);
            sp.y_adapt(r) = t.Y()(rows[r]);
          } else {
            sp.x_test.row(r - a) = t.X().row(rows[r]);
            sp.y_test(r - a) = t.Y()(rows[r]);
          }
        }
        sp.gram_adapt = sp.x_adapt.transpose() * sp.x_adapt;
        sp.xty_adapt = sp.x_adapt.transpose() * sp.y_adapt;
        per_task.push_back(std::move(sp));
      }
      splits[k].push_back(std::move(per_task));
    }
    if (splits[k].empty()) {
      throw Error(ErrorKind::InvalidArgument,
                  "fold " + std::to_string(k) + " has no task with at least two samples");
    }
  }

  LambdaSearch out;
  out.candidates = lambda_candidates(cfg);
  out.cv_loss.reserve(out.candidates.size());
  for (double lambda : out.candidates) {
    double total = 0.0;
    for (std::size_t k = 0; k < k_folds; ++k) {
      double fold = 0.0;
      for (const auto& per_task : splits[k]) {
        double task_loss = 0.0;
        for (const HeldOutSplit& sp : per_task) {
          const VectorXd theta = ridge(sp.gram_adapt, sp.xty_adapt, biases[k], lambda, sp.x_adapt, sp.y_adapt);
          task_loss += (sp.y_test - sp.x_test * theta).squaredNorm() / static_cast<double>(sp.y_test.size());
        }
        fold += task_loss / static_cast<double>(per_task.size());
      }
      total += fold / static_cast<double>(splits[k].size());
    }
    out.cv_loss.push_back(total / static_cast<double>(k_folds));
  }
  // Losses equal to rounding are ties; ties go to the strongest regularization.
  const double best = *std::min_element(out.cv_loss.begin(), out.cv_loss.end());
  const double tie = 1e-12 * *std::max_element(out.cv_loss.begin(), out.cv_loss.end());
  out.lambda = -1.0;
  for (std::size_t c = 0; c < out.candidates.size(); ++c) {
    if (out.cv_loss[c] <= best + tie && out.candidates[c] > out.lambda) out.lambda = out.candidates[c];
  }
  return out;
}

double select_lambda(const Dataset& source_tasks, const CvConfig& cfg, int target_m) {
  return select_lambda_search(source_tasks, cfg, target_m).lambda;
}

MatrixXd mom_moment_matrix(const Dataset& source_tasks) {
  const Index d = source_tasks.d();
  const Index total = source_tasks.total_samples();
  if (total < 1) throw Error(ErrorKind::InvalidArgument, "no source samples");
  MatrixXd moment = MatrixXd::Zero(d, d);
  for (const TaskData& t : source_tasks) {
    const MatrixXd weighted = t.X().transpose() * t.Y().array().square().matrix().asDiagonal();
    moment.noalias() += weighted * t.X();
  }
  return linalg::symmetrize(moment / static_cast<double>(total));
}

RepresentationBasis mom_estimator(const Dataset& source_tasks, int s) {
  const Index d = source_tasks.d();
  if (s < 1 || s > d) throw Error(ErrorKind::InvalidArgument, "rank must satisfy 1 <= s <= d");
  const MatrixXd moment = mom_moment_matrix(source_tasks);
  if (moment.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorKind::Numerical, "moment matrix is zero; data are degenerate");
  }
  // Symmetric PSD, so the SVD is the eigendecomposition.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(moment);
  RepresentationBasis out;
  out.B.resize(d, s);
  for (int k = 0; k < s; ++k) {
    const Index j = d - 1 - k;
    out.B.col(k) = es.eigenvalues()(j) * es.eigenvectors().col(j);
  }
  return out;
}

VectorXd oracle_representation(const TaskData& task, const RepresentationBasis& basis) {
  if (basis.B.rows() != task.d()) throw Error(ErrorKind::DimensionMismatch, "basis dimension differs from task");
  const MatrixXd projected = task.X() * basis.B;
  const VectorXd w = linalg::min_norm_lstsq(projected, task.Y());
  return basis.B * w;
}

double max_correlation(const MatrixXd& A, const MatrixXd& B) {
  if (A.rows() != B.rows()) throw Error(ErrorKind::DimensionMismatch, "bases live in different dimensions");
  const MatrixXd qa = linalg::orthonormal_basis(A);
  const MatrixXd qb = linalg::orthonormal_basis(B);
  if (qa.cols() == 0 || qb.cols() == 0) throw Error(ErrorKind::InvalidArgument, "basis is the zero matrix");
  Eigen::JacobiSVD<MatrixXd> svd(qa.transpose() * qb, Eigen::ComputeThinV);
  // Sine from the residual of the best-aligned pair; sqrt(1 - cos^2) loses
  // half the digits near zero.
  const VectorXd v = qb * svd.matrixV().col(0);
  const double sine = (v - qa * (qa.transpose() * v)).norm();
  return std::clamp(sine, 0.0, 1.0);
}

}  // namespace gaussmeta
