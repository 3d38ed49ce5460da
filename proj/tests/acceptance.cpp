// Acceptance suite: one PASS/FAIL line per criterion. Run with criterion
// numbers as arguments to select a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gaussmeta/baselines.hpp"
#include "gaussmeta/bounds.hpp"
#include "gaussmeta/em.hpp"
#include "gaussmeta/error.hpp"
#include "gaussmeta/estimators.hpp"
#include "gaussmeta/harness.hpp"
#include "gaussmeta/simgen.hpp"
#include "oracles.hpp"

using namespace gaussmeta;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

VectorXd gaussian_vector(Index d, std::mt19937_64& rng) { return oracle::gaussian(d, 1, rng).col(0); }

/// Draws theta_i ~ N(alpha, Sigma) and Y_i for fixed designs; the drawn
/// target parameter is returned through target_theta.
Dataset draw_tasks(const std::vector<MatrixXd>& designs, const Environment& env, std::mt19937_64& rng,
                   VectorXd* target_theta = nullptr) {
  const MatrixXd& f = env.sigma_factor();
  const double sd = std::sqrt(env.sigma2());
  std::vector<TaskData> tasks;
  tasks.reserve(designs.size());
  VectorXd theta;
  for (const MatrixXd& x : designs) {
    theta = env.alpha() + f * gaussian_vector(f.cols(), rng);
    tasks.emplace_back(x, x * theta + sd * gaussian_vector(x.rows(), rng));
  }
  if (target_theta) *target_theta = theta;
  return Dataset(std::move(tasks));
}

Environment random_environment(Index d, std::mt19937_64& rng, double sigma2) {
  return Environment(gaussian_vector(d, rng), sigma2, oracle::random_spd(d, rng));
}

VectorXd mle_plug_in(const Dataset& ds, const Environment& env) {
  const VectorXd a = mle_alpha(ds, env.sigma2(), env.Sigma());
  return plug_in_theta(a, ds.target(), env.sigma2(), env.Sigma());
}

/// L(x) = E[(Y - x^T theta_hat)^2 | D] = (x^T (mu - theta_hat))^2 + x^T Tau x + sigma2,
/// with (mu, Tau) the target posterior under the true environment.
double conditional_risk(const VectorXd& theta_hat, const Dataset& ds, const Environment& env, const VectorXd& x) {
  const PosteriorParams post = posterior_params(ds.target(), env.alpha(), env.sigma2(), env.Sigma());
  const double e = x.dot(post.mu - theta_hat);
  return e * e + x.dot(post.Tau * x) + env.sigma2();
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// 1. Monte Carlo risk of the MLE plug-in against the closed form.
Outcome risk_identity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  const Index d = 3;
  const int n = 20;
  const int m = 5;
  const Environment env = random_environment(d, rng, 1.0);
  std::vector<MatrixXd> designs;
  for (int i = 0; i < n; ++i) designs.push_back(oracle::gaussian(m, d, rng));
  const VectorXd x = gaussian_vector(d, rng).normalized();
  const BoundReport rep = bound_report(designs, env.sigma2(), env.Sigma(), x, {});

  const int draws = 200000;
  std::vector<double> loss(draws);
  std::normal_distribution<double> z;
  VectorXd theta_n;
  for (int k = 0; k < draws; ++k) {
    const Dataset ds = draw_tasks(designs, env, rng, &theta_n);
    const double y = theta_n.dot(x) + std::sqrt(env.sigma2()) * z(rng);
    const double e = y - x.dot(mle_plug_in(ds, env));
    loss[k] = e * e;
  }
  const auto ms = oracle::mean_se(loss);
  const double closed = rep.expected_risk_mle;
  const double tol = std::max(0.02 * closed, 4.0 * ms.se);
  const double elapsed = seconds_since(t0);
  const bool pass = std::abs(ms.mean - closed) <= tol && elapsed < 120.0;
  return {pass, fmt("empirical %.5f (se %.5f) vs closed form %.5f (xMx %.5f, xTx %.5f), tol %.5f, %.1fs",
                    ms.mean, ms.se, closed, rep.xMx, rep.xTx, tol, elapsed)};
}

// 2. Closed-form ordering and Monte Carlo risk of every estimator above lower_all.
Outcome bound_ordering() {
  std::mt19937_64 rng(202);
  const int instances = 100;
  const int draws = 100;
  const std::vector<std::string> names{"lr_task", "lr_all", "biased_regression", "em_learner", "oracle_wbrls"};
  int ordering_violations = 0;
  int risk_violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string worst;

  for (int inst = 0; inst < instances; ++inst) {
    const Index d = 2 + static_cast<Index>(rng() % 2);
    const int n = 6 + static_cast<int>(rng() % 7);
    std::uniform_real_distribution<double> s2(0.3, 1.5);
    const Environment env = random_environment(d, rng, s2(rng));
    std::vector<MatrixXd> designs;
    for (int i = 0; i < n; ++i) designs.push_back(oracle::gaussian(2 + static_cast<Index>(rng() % 5), d, rng));
    const VectorXd x = gaussian_vector(d, rng);
    const BoundReport rep = bound_report(designs, env.sigma2(), env.Sigma(), x, {});
    if (!(rep.lower_all <= rep.expected_risk_mle)) ++ordering_violations;

    CvConfig cv;
    cv.n_folds = std::min(10, n - 1);
    std::vector<std::vector<double>> risk(names.size());
    for (int k = 0; k < draws; ++k) {
      const Dataset ds = draw_tasks(designs, env, rng);
      const Dataset sources(std::vector<TaskData>(ds.begin(), ds.end() - 1));
      const TaskData& target = ds.target();
      cv.seed = rng();
      const double lambda = select_lambda(sources, cv, static_cast<int>(target.m()));
      const EmResult em = em_fit(ds);
      const std::vector<VectorXd> estimates{
          ols(target),
          pooled_bias(ds),
          biased_regression(target, pooled_bias(sources), lambda),
          posterior_params(target, em.env.alpha(), em.env.sigma2(), em.env.Sigma()).mu,
          mle_plug_in(ds, env),
      };
      for (std::size_t e = 0; e < names.size(); ++e) risk[e].push_back(conditional_risk(estimates[e], ds, env, x));
    }
    for (std::size_t e = 0; e < names.size(); ++e) {
      const auto ms = oracle::mean_se(risk[e]);
      const double margin = (ms.mean - rep.lower_all) / std::max(ms.se, 1e-300);
      if (ms.mean < rep.lower_all - 3.0 * ms.se) ++risk_violations;
      if (margin < worst_margin) {
        worst_margin = margin;
        worst = names[e];
      }
    }
  }
  return {ordering_violations == 0 && risk_violations == 0,
          fmt("%d instances, ordering violations %d, risk violations %d, smallest margin %.2f se (%s)", instances,
              ordering_violations, risk_violations, worst_margin, worst.c_str())};
}

// 3. lower_unbiased against the dense inverse-based route.
Outcome unbiased_tightness() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const Index d = 1 + static_cast<Index>(rng() % 4);
    const int n = 1 + static_cast<int>(rng() % 6);
    const Environment env = random_environment(d, rng, 0.2 + 0.3 * static_cast<double>(rng() % 5));
    std::vector<MatrixXd> designs;
    for (int i = 0; i < n; ++i) designs.push_back(oracle::gaussian(1 + static_cast<Index>(rng() % 6), d, rng));
    // The pooled design must span R^d.
    designs.push_back(oracle::gaussian(d, d, rng));
    const VectorXd x = gaussian_vector(d, rng);
    const MatrixXd m = oracle::dense_M(designs, env.sigma2(), env.Sigma());
    const MatrixXd tau = oracle::dense_tau(designs.back(), env.sigma2(), env.Sigma());
    const double dense = x.dot(m * x) + x.dot(tau * x) + env.sigma2();
    const double lib = bound_report(designs, env.sigma2(), env.Sigma(), x, {}).lower_unbiased;
    worst = std::max(worst, std::abs(lib - dense) / std::abs(dense));
  }
  return {worst <= 1e-10, fmt("100 instances, max relative difference %.3e", worst)};
}

// 4. WBRLS with Gamma = Sigma^{-1}, lambda = sigma2 against the posterior plug-in.
Outcome wbrls_equivalence() {
  std::mt19937_64 rng(404);
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const Index d = 1 + static_cast<Index>(rng() % 6);
    const Index m = 1 + static_cast<Index>(rng() % 12);
    const TaskData task(oracle::gaussian(m, d, rng), gaussian_vector(m, rng));
    const MatrixXd sigma = oracle::random_spd(d, rng);
    const VectorXd a = gaussian_vector(d, rng);
    const double s2 = 0.1 + 0.2 * static_cast<double>(inst % 5);
    const VectorXd lhs = wbrls(task, {a, sigma.inverse(), s2});
    const VectorXd rhs = plug_in_theta(a, task, s2, sigma);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff());
  }
  return {worst < 1e-9, fmt("200 instances, max relative coefficient difference %.3e", worst)};
}

// 5. Isotropic closed forms against the matrix route on isotropic designs.
Outcome isotropic_closed_forms() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> unif(0.2, 3.0);
  double worst1 = 0.0;
  double worst2 = 0.0;
  int cor2_bound_violations = 0;
  const double c = lower_bound_constant();

  for (int inst = 0; inst < 50; ++inst) {
    const int d = 2 + static_cast<int>(rng() % 4);
    const int n = std::vector<int>{1, 3, 10}[inst % 3];
    IsotropicSpec spec;
    spec.d = d;
    spec.sigma2 = unif(rng);
    std::vector<MatrixXd> designs;
    for (int i = 0; i < n; ++i) {
      const int m = d + static_cast<int>(rng() % (2 * d));
      spec.m.push_back(m);
      designs.push_back(oracle::isotropic_design(m, d, rng));
    }
    const VectorXd x = gaussian_vector(d, rng);

    // Spherical: Sigma = tau2 I.
    const double tau2 = unif(rng);
    spec.spectrum = tau2;
    const MatrixXd sph = tau2 * MatrixXd::Identity(d, d);
    const BoundReport r1 = bound_report(designs, spec.sigma2, sph, x, {});
    const double matrix1 = (r1.lower_all - spec.sigma2) / spec.sigma2;
    worst1 = std::max(worst1, std::abs(spherical_isotropic_bound(spec, x.norm()) - matrix1) / matrix1);

    // Low rank: rank s with trailing eigenvalues eps standing in for zero.
    const int s = 1 + static_cast<int>(rng() % (d - 1));
    const MatrixXd u = Eigen::HouseholderQR<MatrixXd>(oracle::gaussian(d, d, rng)).householderQ();
    const MatrixXd top = u.leftCols(s);
    const MatrixXd proj = top * top.transpose();
    const double eps = 1e-8;
    const double lambda = unif(rng);
    const MatrixXd flat = lambda * proj + eps * (MatrixXd::Identity(d, d) - proj);
    const VectorXd xs = proj * x;
    const BoundReport r2 = bound_report(designs, spec.sigma2, flat, xs, {});
    const double matrix2 = (r2.xMx / c + r2.xTx) / spec.sigma2;
    spec.spectrum = std::vector<double>(s, lambda);
    worst2 = std::max(worst2, std::abs(lowrank_isotropic_bound(spec, xs.squaredNorm()) - matrix2) / matrix2);

    // Distinct eigenvalues: the low-rank closed form is a lower bound on the matrix route.
    std::vector<double> ev(s);
    for (double& v : ev) v = unif(rng);
    std::sort(ev.rbegin(), ev.rend());
    MatrixXd spread = eps * (MatrixXd::Identity(d, d) - proj);
    for (int j = 0; j < s; ++j) spread += ev[j] * top.col(j) * top.col(j).transpose();
    const BoundReport r3 = bound_report(designs, spec.sigma2, spread, x, {});
    spec.spectrum = ev;
    const double cor2 = lowrank_isotropic_bound(spec, (proj * x).squaredNorm());
    if (cor2 > (r3.lower_all - spec.sigma2) / spec.sigma2 * (1.0 + 1e-9)) ++cor2_bound_violations;
  }
  return {worst1 <= 1e-9 && worst2 <= 1e-4 && cor2_bound_violations == 0,
          fmt("spherical max rel diff %.3e, low-rank eps-limit max rel diff %.3e, "
              "low-rank lower-bound violations %d",
              worst1, worst2, cor2_bound_violations)};
}

// 6. EM log-likelihood ascent and convergence.
Outcome em_ascent() {
  std::mt19937_64 rng(606);
  int non_monotone = 0;
  int converged = 0;
  int errors = 0;
  std::string first_error;
  double worst_drop = 0.0;
  const int instances = 100;
  for (int inst = 0; inst < instances; ++inst) {
    const Index d = 1 + static_cast<Index>(rng() % 5);
    const int n = 2 + static_cast<int>(rng() % 49);
    std::uniform_real_distribution<double> s2(0.2, 2.0);
    const Environment env = random_environment(d, rng, s2(rng));
    std::vector<MatrixXd> designs;
    for (int i = 0; i < n; ++i) designs.push_back(oracle::gaussian(1 + static_cast<Index>(rng() % 10), d, rng));
    const Dataset ds = draw_tasks(designs, env, rng);
    EmConfig cfg;
    cfg.rel_tol = 1e-6;
    cfg.max_iter = 1000;
    std::vector<double> ll{marginal_log_likelihood(ds, default_em_init(ds))};
    cfg.on_iteration = [&](const EmIterationRecord& rec) { ll.push_back(rec.log_likelihood); };
    try {
      if (em_fit(ds, cfg).trace.converged) ++converged;
    } catch (const Error& e) {
      ++errors;
      if (first_error.empty()) first_error = fmt("instance %d: %s", inst, e.what());
    }
    bool ok = true;
    for (std::size_t i = 1; i < ll.size(); ++i) {
      worst_drop = std::max(worst_drop, ll[i - 1] - ll[i]);
      if (ll[i] < ll[i - 1] - 1e-8) ok = false;
    }
    if (!ok) ++non_monotone;
  }
  return {non_monotone == 0 && converged >= 95,
          fmt("%d instances, non-monotone %d (largest drop %.3e), converged %d, stopped with error %d%s%s", instances,
              non_monotone, worst_drop, converged, errors, first_error.empty() ? "" : "; first: ",
              first_error.c_str())};
}

// 7. EM recovers (Sigma, sigma2) at n = 2000.
Outcome em_consistency() {
  const auto t0 = Clock::now();
  std::vector<double> sigma_err;
  std::vector<double> noise_err;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = derived_rng({707, seed});
    const MatrixXd sigma = gen_sigma_full(5, rng);
    const VectorXd alpha = oracle::gaussian(5, 1, rng).col(0);
    GenSpec spec;
    spec.kind = GenKind::MomSetup;
    spec.d = 5;
    spec.rank = 5;
    spec.n_tasks = 2000;
    spec.m_per_task = {10};
    spec.n_test_tasks = 0;
    spec.seed = derived_seed({707, seed, 1});
    const GeneratedData data = gen_dataset(spec, alpha, 1.0, sigma);
    const EmResult r = em_fit(data.train);
    sigma_err.push_back((r.env.Sigma() - sigma).norm() / sigma.norm());
    noise_err.push_back(std::abs(r.env.sigma2() - 1.0));
  }
  const double med_sigma = quantile(sigma_err, 0.5);
  const double med_noise = quantile(noise_err, 0.5);
  const double elapsed = seconds_since(t0);
  return {med_sigma <= 0.15 && med_noise <= 0.05 && elapsed < 300.0,
          fmt("median relative Sigma error %.4f, median relative sigma2 error %.4f, %.1fs", med_sigma, med_noise,
              elapsed)};
}

int worker_count() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double paired_se(const ResultTable& t, const std::string& a, const std::string& b, int value) {
  std::vector<double> va;
  std::vector<double> vb;
  for (const auto& r : t.rows) {
    if (r.sweep_value != value || r.status != "ok") continue;
    if (r.method == a) va.push_back(r.value);
    if (r.method == b) vb.push_back(r.value);
  }
  std::vector<double> diff(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) diff[i] = va[i] - vb[i];
  return oracle::mean_se(diff).se;
}

// 8. Fourier risk-versus-n trends.
Outcome fourier_trend() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  GenSpec spec;
  spec.kind = GenKind::Fourier;
  spec.m_per_task = {10};
  cfg.generator = spec;
  cfg.methods = {"em_learner", "oracle_wbrls", "known_cov_lower_bound"};
  cfg.sweep_values = {10, 50, 100};
  cfg.n_repetitions = 30;
  cfg.seed = 808;
  cfg.threads = worker_count();
  const ResultTable t = run_experiment(cfg);

  int errors = 0;
  for (const auto& r : t.rows) errors += r.status != "ok";
  bool decreasing = true;
  bool above = true;
  std::ostringstream detail;
  double prev = std::numeric_limits<double>::infinity();
  for (int v : cfg.sweep_values) {
    const double em = t.mean("em_learner", v);
    const double lb = t.mean("known_cov_lower_bound", v);
    const double se = paired_se(t, "em_learner", "known_cov_lower_bound", v);
    if (!(em < prev)) decreasing = false;
    if (!(em >= lb - 3.0 * se)) above = false;
    prev = em;
    detail << fmt("n=%d em %.4f wbrls %.4f bound %.4f; ", v, em, t.mean("oracle_wbrls", v), lb);
  }
  const double em100 = t.mean("em_learner", 100);
  const double or100 = t.mean("oracle_wbrls", 100);
  const double gap = std::abs(em100 - or100) / or100;
  detail << fmt("gap at n=100 %.2f%%, errors %d, %.1fs", 100.0 * gap, errors, seconds_since(t0));
  return {errors == 0 && decreasing && above && gap <= 0.10, detail.str()};
}

/// Spearman correlation and its one-sided exact permutation p-value for a
/// negative trend.
std::pair<double, double> spearman_decreasing(const std::vector<double>& y) {
  const std::size_t k = y.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  std::vector<double> rank(k);
  for (std::size_t i = 0; i < k; ++i) rank[order[i]] = static_cast<double>(i);
  auto rho_of = [&](const std::vector<double>& r) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) d2 += (r[i] - static_cast<double>(i)) * (r[i] - static_cast<double>(i));
    const double kk = static_cast<double>(k);
    return 1.0 - 6.0 * d2 / (kk * (kk * kk - 1.0));
  };
  const double rho = rho_of(rank);
  std::vector<double> perm(k);
  std::iota(perm.begin(), perm.end(), 0.0);
  int at_most = 0;
  int total = 0;
  do {
    ++total;
    if (rho_of(perm) <= rho + 1e-12) ++at_most;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {rho, static_cast<double>(at_most) / total};
}

// 9. Subspace recovery: EM with rank clipping against the method of moments.
Outcome subspace_trend() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.type = ExperimentType::Subspace;
  GenSpec spec;
  spec.kind = GenKind::MomSetup;
  spec.d = 30;
  spec.rank = 3;
  spec.m_per_task = {5};
  spec.n_test_tasks = 0;
  cfg.generator = spec;
  cfg.representation_rank = 3;
  cfg.methods = {"em_clip", "mom"};
  // n >= d: with fewer tasks than dimensions the likelihood has no maximizer.
  cfg.sweep_values = {50, 100, 200, 400, 800};
  cfg.n_repetitions = 30;
  cfg.seed = 909;
  cfg.threads = worker_count();
  const ResultTable t = run_subspace_experiment(cfg);

  int errors = 0;
  for (const auto& r : t.rows) errors += r.status != "ok";
  std::vector<double> em_means;
  std::ostringstream detail;
  for (int v : cfg.sweep_values) {
    em_means.push_back(t.mean("em_clip", v));
    detail << fmt("n=%d em %.3f mom %.3f; ", v, em_means.back(), t.mean("mom", v));
  }
  const int largest = cfg.sweep_values.back();
  const bool better = t.mean("em_clip", largest) < t.mean("mom", largest);
  const auto [rho, p] = spearman_decreasing(em_means);
  detail << fmt("spearman %.3f (p %.4f), errors %d, %.1fs", rho, p, errors, seconds_since(t0));
  return {errors == 0 && better && rho < 0.0 && p <= 0.05, detail.str()};
}

// 10. High-probability sandwich for the MLE plug-in.
Outcome highprob_sandwich() {
  std::mt19937_64 rng(1010);
  const Index d = 3;
  const Environment env = random_environment(d, rng, 1.0);
  std::vector<MatrixXd> designs;
  for (int i = 0; i < 5; ++i) designs.push_back(oracle::gaussian(4, d, rng));
  const VectorXd x = gaussian_vector(d, rng).normalized();
  const std::vector<double> deltas{0.05, 0.95};
  const BoundReport rep = bound_report(designs, env.sigma2(), env.Sigma(), x, deltas);

  std::vector<double> risk;
  for (int k = 0; k < 10000; ++k) {
    const Dataset ds = draw_tasks(designs, env, rng);
    risk.push_back(conditional_risk(mle_plug_in(ds, env), ds, env, x));
  }
  // Confidence 1 - delta: the delta-quantile clears the lower bound and the
  // (1 - delta)-quantile stays under the upper bound.
  bool pass = true;
  std::ostringstream detail;
  detail << fmt("xMx %.4f; ", rep.xMx);
  for (const auto& hp : rep.highprob) {
    const double q_low = quantile(risk, hp.delta);
    const double q_high = quantile(risk, 1.0 - hp.delta);
    pass = pass && q_low >= hp.lower && q_high <= hp.upper;
    detail << fmt("delta %.2f: q%.0f %.4f >= lower %.4f, q%.0f %.4f <= upper %.4f; ", hp.delta, 100 * hp.delta,
                  q_low, hp.lower, 100 * (1 - hp.delta), q_high, hp.upper);
  }
  return {pass, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"risk identity", risk_identity},
      {"bound ordering", bound_ordering},
      {"unbiased bound tightness", unbiased_tightness},
      {"WBRLS equivalence", wbrls_equivalence},
      {"isotropic closed forms", isotropic_closed_forms},
      {"EM ascent", em_ascent},
      {"EM consistency", em_consistency},
      {"Fourier trends", fourier_trend},
      {"subspace trend", subspace_trend},
      {"high-probability sandwich", highprob_sandwich},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %d (%s): %s | %s\n", id, criteria[k].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
