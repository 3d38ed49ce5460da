#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gaussmeta/core.hpp"

namespace gaussmeta {

using Rng = std::mt19937_64;

/// Rng seeded from a list of integers through std::seed_seq.
Rng derived_rng(std::initializer_list<std::uint64_t> keys);
/// A 64-bit seed derived the same way.
std::uint64_t derived_seed(std::initializer_list<std::uint64_t> keys);

enum class GenKind { Fourier, Spherical, LowrankFourier, MomSetup };

std::string to_string(GenKind kind);
/// Accepts fourier, spherical, lowrank_fourier, mom_setup.
GenKind parse_gen_kind(const std::string& name);

struct GenSpec {
  GenKind kind = GenKind::Fourier;
  int d = 11;
  int n_tasks = 10;
  /// One entry applies to every task; otherwise one entry per task.
  std::vector<int> m_per_task{10};
  int n_test_tasks = 100;
  int m_test_adapt = 10;
  int m_test_eval = 100;
  /// Rank of Sigma for lowrank_fourier and of B for mom_setup.
  int rank = 5;
  std::uint64_t seed = 0;

  int task_m(std::size_t i) const;
  /// Throws InvalidArgument on inconsistent fields (Fourier kinds need d == 11).
  void validate() const;
};

/// sin(j pi u / 5) for j = 1..5, cos(j pi u / 5) for j = 1..5, then 1.
VectorXd fourier_features(double u);

/// L L^T + |eta| I with L lower triangular standard normal and eta standard
/// normal. The raw eta draw is written to eta_raw when given.
MatrixXd gen_sigma_full(int d, Rng& rng, double* eta_raw = nullptr);

/// L L^T with L a d x r standard normal matrix.
MatrixXd gen_sigma_lowrank(int d, int r, Rng& rng);

/// d x s matrix whose columns are uniform on the unit sphere.
MatrixXd gen_sphere_columns(int d, int s, Rng& rng);

/// m rows drawn from the input distribution of the given kind.
MatrixXd sample_inputs(GenKind kind, int d, int m, Rng& rng);

struct GeneratedEnvironment {
  Environment env;
  /// B for mom_setup (Sigma = B B^T / s); empty otherwise.
  MatrixXd basis;
  /// The raw eta of gen_sigma_full; NaN when not used.
  double eta_raw;
};

/// alpha = 0, sigma2 = 1 and the covariance family of spec.kind.
GeneratedEnvironment gen_environment(const GenSpec& spec, Rng& rng);

struct TestTask {
  TaskData adapt;
  TaskData eval;
};

struct GeneratedData {
  Dataset train;
  std::vector<TestTask> test;
};

/// Source tasks and test tasks drawn from env. Each task uses its own
/// substream derived from (spec.seed, role, index), so the draws for task i
/// do not depend on n_tasks.
GeneratedData gen_dataset(const GenSpec& spec, const Environment& env);
/// Same with raw parameters; sigma2 = 0 (noiseless) is allowed here.
GeneratedData gen_dataset(const GenSpec& spec, const VectorXd& alpha, double sigma2,
                          const MatrixXd& Sigma);

}  // namespace gaussmeta
