#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "gaussmeta/baselines.hpp"
#include "gaussmeta/ingest.hpp"
#include "gaussmeta/simgen.hpp"

namespace gaussmeta {

enum class ExperimentType { Risk, Subspace };

/// Methods of a risk experiment:
///   lr_all, lr_task, biased_regression, em_learner, oracle_wbrls,
///   oracle_representation, mom, known_cov_lower_bound.
/// Methods of a subspace experiment: em_clip, mom.
const std::vector<std::string>& risk_methods();
const std::vector<std::string>& subspace_methods();

struct ExperimentConfig {
  std::string name = "experiment";
  ExperimentType type = ExperimentType::Risk;
  std::variant<GenSpec, SchoolConfig> generator = GenSpec{};
  std::vector<std::string> methods;
  /// "n_tasks" or "m_per_task" (the latter for synthetic generators only).
  std::string sweep = "n_tasks";
  std::vector<int> sweep_values;
  int n_repetitions = 30;
  std::uint64_t seed = 0;
  /// Rank of the representation used by oracle_representation, mom and em_clip.
  int representation_rank = 5;
  double em_rel_tol = 1e-6;
  int em_max_iter = 1000;
  CvConfig cv;
  int threads = 1;

  void validate() const;
};

struct ResultRow {
  std::string method;
  int sweep_value;
  int repetition;
  double value;
  /// "ok", or "error:<kind>:<message>" with value NaN.
  std::string status;
};

struct SummaryRow {
  std::string method;
  int sweep_value;
  double mean;
  double std;  ///< sample standard deviation; NaN when fewer than two values
  int count;   ///< rows with status ok
};

struct ResultTable {
  std::string sweep_param;
  /// mean_test_error for risk experiments, d_max for subspace experiments.
  std::string value_name;
  std::vector<ResultRow> rows;

  std::vector<SummaryRow> summary() const;
  /// Mean of the ok rows for one (method, sweep value); NaN when none.
  double mean(const std::string& method, int sweep_value) const;

  /// method,<sweep_param>,repetition,<value_name>,status
  void write_csv(std::ostream& out) const;
  /// method,<sweep_param>,mean,std,count
  void write_summary_csv(std::ostream& out) const;
};

/// Sweeps (repetition x sweep value) cells. The environment is drawn from
/// (seed, repetition); the data from (seed, repetition, sweep index). Rows are
/// ordered by sweep value, then repetition, then method list order, whatever
/// the thread count.
ResultTable run_experiment(const ExperimentConfig& cfg);

/// Max-correlation between the true basis and the EM rank-clipped basis
/// (em_clip) or the method-of-moments basis (mom). Needs a mom_setup generator.
ResultTable run_subspace_experiment(const ExperimentConfig& cfg);

/// Runs fn(0..n-1) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Mean of (y - x^T theta)^2 over the rows of eval.
double mean_squared_error(const VectorXd& theta, const TaskData& eval);

}  // namespace gaussmeta
