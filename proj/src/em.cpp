#include "gaussmeta/em.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "gaussmeta/error.hpp"
#include "gaussmeta/linalg.hpp"

namespace gaussmeta {

void EmConfig::validate() const {
  if (!(rel_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "rel_tol must be positive");
  if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be at least 1");
}

Environment default_em_init(const Dataset& ds) {
  const Index d = ds.d();
  MatrixXd gram = MatrixXd::Zero(d, d);
  VectorXd xty = VectorXd::Zero(d);
  for (const TaskData& t : ds) {
    gram += t.gram();
    xty += t.xty();
  }
  VectorXd alpha = VectorXd::Zero(d);
  if (linalg::psd_rank(gram) == d) alpha = Eigen::LLT<MatrixXd>(gram).solve(xty);

  double rss = 0.0;
  Index dof = 0;
  for (const TaskData& t : ds) {
    if (t.m() <= d) continue;
    const VectorXd w = linalg::min_norm_lstsq(t.X(), t.Y());
    rss += (t.Y() - t.X() * w).squaredNorm();
    dof += t.m() - d;
  }
  double sigma2 = dof > 0 ? rss / static_cast<double>(dof) : 1.0;
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) sigma2 = 1.0;
  return Environment(std::move(alpha), sigma2, MatrixXd::Identity(d, d));
}

std::vector<PosteriorParams> e_step(const Dataset& ds, const Environment& env_hat) {
  if (env_hat.dim() != ds.d()) throw Error(ErrorKind::DimensionMismatch, "environment dimension differs from dataset");
  const PosteriorSolver solver(env_hat);
  std::vector<PosteriorParams> out;
  out.reserve(ds.n());
  for (const TaskData& t : ds) out.push_back(solver(t));
  return out;
}

Environment m_step(const Dataset& ds, const std::vector<PosteriorParams>& posteriors,
                   NoiseUpdate noise_update) {
  if (posteriors.size() != ds.n()) {
    throw Error(ErrorKind::DimensionMismatch, "one posterior per task is required");
  }
  const Index d = ds.d();
  const double n = static_cast<double>(ds.n());

  VectorXd alpha = VectorXd::Zero(d);
  for (const auto& p : posteriors) alpha += p.mu;
  alpha /= n;

  MatrixXd sigma = MatrixXd::Zero(d, d);
  double sigma2 = 0.0;
  double samples = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const TaskData& t = ds[i];
    if (t.m() == 0) {
      Error e(ErrorKind::InvalidArgument, "task " + std::to_string(i) + " is empty; the noise update is undefined");
      throw e.with_task(i);
    }
    const PosteriorParams& p = posteriors[i];
    const VectorXd dev = p.mu - alpha;
    sigma += p.Tau + dev * dev.transpose();
    const double fit = (t.Y() - t.X() * p.mu).squaredNorm();
    const double spread = (t.gram().cwiseProduct(p.Tau)).sum();  // tr(X Tau X^T)
    const double m = static_cast<double>(t.m());
    sigma2 += noise_update == NoiseUpdate::Pooled ? fit + spread : (fit + spread) / m;
    samples += m;
  }
  sigma /= n;
  sigma2 /= noise_update == NoiseUpdate::Pooled ? samples : n;
  return Environment(std::move(alpha), sigma2, linalg::symmetrize(sigma));
}

double relative_change(const Environment& prev, const Environment& next) {
  constexpr double kEps = 1e-12;
  const double da = (next.alpha() - prev.alpha()).norm() / (prev.alpha().norm() + kEps);
  const double ds2 = std::abs(next.sigma2() - prev.sigma2()) / (prev.sigma2() + kEps);
  const double dS = (next.Sigma() - prev.Sigma()).norm() / (prev.Sigma().norm() + kEps);
  return std::max({da, ds2, dS});
}

EmResult em_fit(const Dataset& ds, const EmConfig& cfg) {
  cfg.validate();
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds[i].m() == 0) {
      Error e(ErrorKind::InvalidArgument, "EM requires every task to have at least one sample");
      throw e.with_task(i);
    }
  }
  Environment env = cfg.init ? *cfg.init : default_em_init(ds);
  if (env.dim() != ds.d()) throw Error(ErrorKind::DimensionMismatch, "initial environment dimension differs from dataset");

  // Noise this far below the mean squared response means the likelihood is
  // running off to +infinity along an exact-fit direction.
  double y_energy = 0.0;
  for (const TaskData& t : ds) y_energy += t.Y().squaredNorm();
  const double collapse = 1e-12 * y_energy / static_cast<double>(ds.total_samples());

  EmTrace trace;
  trace.log_likelihoods.push_back(marginal_log_likelihood(ds, env));
  for (int it = 1; it <= cfg.max_iter; ++it) {
    try {
      Environment next = m_step(ds, e_step(ds, env), cfg.noise_update);
      if (next.sigma2() < collapse) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", next.sigma2());
        throw Error(ErrorKind::Numerical,
                    std::string("noise variance collapsed to ") + buf + "; the likelihood is unbounded for this dataset");
      }
      const double change = relative_change(env, next);
      env = std::move(next);
      const double ll = marginal_log_likelihood(ds, env);
      trace.log_likelihoods.push_back(ll);
      trace.relative_changes.push_back(change);
      trace.iterations = it;
      if (cfg.on_iteration) cfg.on_iteration({it, ll, change});
      if (change < cfg.rel_tol) {
        trace.converged = true;
        break;
      }
    } catch (Error& e) {
      e.iteration = static_cast<std::size_t>(it);
      throw;
    }
  }
  return {std::move(env), std::move(trace)};
}

RankClipResult rank_clip(const MatrixXd& Sigma_hat, int s) {
  const Index d = Sigma_hat.rows();
  if (Sigma_hat.cols() != d) throw Error(ErrorKind::DimensionMismatch, "Sigma_hat must be square");
  if (s < 1 || s > d) throw Error(ErrorKind::InvalidArgument, "rank must satisfy 1 <= s <= d");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(linalg::symmetrize(Sigma_hat));
  VectorXd ev = es.eigenvalues();  // ascending
  const MatrixXd& u = es.eigenvectors();
  RankClipResult out;
  if (s == d) {
    out.Sigma = Sigma_hat;
  } else {
    ev.head(d - s).setZero();
    out.Sigma = linalg::symmetrize(u * ev.asDiagonal() * u.transpose());
  }
  out.basis.resize(d, s);
  for (int k = 0; k < s; ++k) {
    const Index j = d - 1 - k;
    out.basis.col(k) = u.col(j) * std::sqrt(std::max(0.0, ev(j)));
  }
  return out;
}

}  // namespace gaussmeta
