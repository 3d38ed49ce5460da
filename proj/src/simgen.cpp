#include "gaussmeta/simgen.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "gaussmeta/error.hpp"
#include "gaussmeta/linalg.hpp"

namespace gaussmeta {

Rng derived_rng(std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t k : keys) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

std::uint64_t derived_seed(std::initializer_list<std::uint64_t> keys) {
  Rng rng = derived_rng(keys);
  return rng();
}

std::string to_string(GenKind kind) {
  switch (kind) {
    case GenKind::Fourier: return "fourier";
    case GenKind::Spherical: return "spherical";
    case GenKind::LowrankFourier: return "lowrank_fourier";
    case GenKind::MomSetup: return "mom_setup";
  }
  return "unknown";
}

GenKind parse_gen_kind(const std::string& name) {
  if (name == "fourier") return GenKind::Fourier;
  if (name == "spherical") return GenKind::Spherical;
  if (name == "lowrank_fourier") return GenKind::LowrankFourier;
  if (name == "mom_setup") return GenKind::MomSetup;
  throw Error(ErrorKind::Parse, "unknown generator kind '" + name + "'");
}

int GenSpec::task_m(std::size_t i) const {
  return m_per_task.size() == 1 ? m_per_task.front() : m_per_task.at(i);
}

void GenSpec::validate() const {
  const bool fourier = kind == GenKind::Fourier || kind == GenKind::LowrankFourier;
  if (fourier && d != 11) throw Error(ErrorKind::InvalidArgument, "Fourier features have d = 11");
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "d must be positive");
  if (n_tasks < 1) throw Error(ErrorKind::InvalidArgument, "n_tasks must be positive");
  if (m_per_task.size() != 1 && m_per_task.size() != static_cast<std::size_t>(n_tasks)) {
    throw Error(ErrorKind::InvalidArgument, "m_per_task needs one entry or one per task");
  }
  for (int m : m_per_task) {
    if (m < 0) throw Error(ErrorKind::InvalidArgument, "task sizes must be nonnegative");
  }
  if (n_test_tasks < 0 || m_test_adapt < 0 || m_test_eval < 0) {
    throw Error(ErrorKind::InvalidArgument, "test task sizes must be nonnegative");
  }
  if ((kind == GenKind::LowrankFourier || kind == GenKind::MomSetup) && (rank < 1 || rank > d)) {
    throw Error(ErrorKind::InvalidArgument, "rank must satisfy 1 <= rank <= d");
  }
}

VectorXd fourier_features(double u) {
  VectorXd x(11);
  for (int j = 1; j <= 5; ++j) {
    x(j - 1) = std::sin(j * std::numbers::pi * u / 5.0);
    x(j + 4) = std::cos(j * std::numbers::pi * u / 5.0);
  }
  x(10) = 1.0;
  return x;
}

namespace {

MatrixXd standard_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> z;
  MatrixXd out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = z(rng);
  }
  return out;
}

VectorXd sample_theta(const VectorXd& alpha, const MatrixXd& factor, Rng& rng) {
  return alpha + factor * standard_normal(factor.cols(), 1, rng).col(0);
}

TaskData sample_task(GenKind kind, int m, const VectorXd& theta, double noise_sd, Rng& rng) {
  MatrixXd x = sample_inputs(kind, static_cast<int>(theta.size()), m, rng);
  VectorXd y = x * theta;
  if (noise_sd > 0.0) y += noise_sd * standard_normal(m, 1, rng).col(0);
  return TaskData(std::move(x), std::move(y));
}

constexpr std::uint64_t kSourceRole = 1;
constexpr std::uint64_t kTestRole = 2;

}  // namespace

MatrixXd gen_sigma_full(int d, Rng& rng, double* eta_raw) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "d must be positive");
  const MatrixXd l = standard_normal(d, d, rng).triangularView<Eigen::Lower>();
  std::normal_distribution<double> z;
  const double eta = z(rng);
  if (eta_raw) *eta_raw = eta;
  MatrixXd sigma = l * l.transpose();
  sigma.diagonal().array() += std::abs(eta);
  return linalg::symmetrize(sigma);
}

MatrixXd gen_sigma_lowrank(int d, int r, Rng& rng) {
  if (r < 1 || r > d) throw Error(ErrorKind::InvalidArgument, "rank must satisfy 1 <= r <= d");
  const MatrixXd l = standard_normal(d, r, rng);
  return linalg::symmetrize(l * l.transpose());
}

MatrixXd gen_sphere_columns(int d, int s, Rng& rng) {
  MatrixXd b = standard_normal(d, s, rng);
  b.colwise().normalize();
  return b;
}

MatrixXd sample_inputs(GenKind kind, int d, int m, Rng& rng) {
  switch (kind) {
    case GenKind::Fourier:
    case GenKind::LowrankFourier: {
      std::uniform_real_distribution<double> u(-5.0, 5.0);
      MatrixXd x(m, 11);
      for (int i = 0; i < m; ++i) x.row(i) = fourier_features(u(rng)).transpose();
      return x;
    }
    case GenKind::Spherical: {
      MatrixXd x = standard_normal(m, d, rng);
      x.rowwise().normalize();
      return x;
    }
    case GenKind::MomSetup:
      return standard_normal(m, d, rng);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown generator kind");
}

GeneratedEnvironment gen_environment(const GenSpec& spec, Rng& rng) {
  spec.validate();
  const int d = spec.d;
  double eta = std::numeric_limits<double>::quiet_NaN();
  MatrixXd basis;
  MatrixXd sigma;
  switch (spec.kind) {
    case GenKind::Fourier:
    case GenKind::Spherical:
      sigma = gen_sigma_full(d, rng, &eta);
      break;
    case GenKind::LowrankFourier:
      sigma = gen_sigma_lowrank(d, spec.rank, rng);
      break;
    case GenKind::MomSetup:
      basis = gen_sphere_columns(d, spec.rank, rng);
      sigma = linalg::symmetrize(basis * basis.transpose() / spec.rank);
      break;
  }
  return {Environment(VectorXd::Zero(d), 1.0, std::move(sigma)), std::move(basis), eta};
}

GeneratedData gen_dataset(const GenSpec& spec, const VectorXd& alpha, double sigma2,
                          const MatrixXd& Sigma) {
  spec.validate();
  if (alpha.size() != spec.d || Sigma.rows() != spec.d || Sigma.cols() != spec.d) {
    throw Error(ErrorKind::DimensionMismatch, "environment dimension differs from generator d");
  }
  if (!(sigma2 >= 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma2 must be nonnegative");
  if (!linalg::is_psd(Sigma)) throw Error(ErrorKind::NotPositiveDefinite, "Sigma must be symmetric PSD");
  const MatrixXd factor = linalg::psd_factor(linalg::symmetrize(Sigma));
  const double noise_sd = std::sqrt(sigma2);

  std::vector<TaskData> tasks;
  tasks.reserve(spec.n_tasks);
  for (int i = 0; i < spec.n_tasks; ++i) {
    Rng rng = derived_rng({spec.seed, kSourceRole, static_cast<std::uint64_t>(i)});
    const VectorXd theta = sample_theta(alpha, factor, rng);
    tasks.push_back(sample_task(spec.kind, spec.task_m(i), theta, noise_sd, rng));
  }

  std::vector<TestTask> test;
  test.reserve(spec.n_test_tasks);
  for (int j = 0; j < spec.n_test_tasks; ++j) {
    Rng rng = derived_rng({spec.seed, kTestRole, static_cast<std::uint64_t>(j)});
    const VectorXd theta = sample_theta(alpha, factor, rng);
    TaskData adapt = sample_task(spec.kind, spec.m_test_adapt, theta, noise_sd, rng);
    TaskData eval = sample_task(spec.kind, spec.m_test_eval, theta, noise_sd, rng);
    test.push_back({std::move(adapt), std::move(eval)});
  }
  return {Dataset(std::move(tasks)), std::move(test)};
}

GeneratedData gen_dataset(const GenSpec& spec, const Environment& env) {
  return gen_dataset(spec, env.alpha(), env.sigma2(), env.Sigma());
}

}  // namespace gaussmeta
