#pragma once

#include <filesystem>
#include <iosfwd>

#include "gaussmeta/harness.hpp"

namespace gaussmeta {

/// Reads an experiment from an INI file (';' starts a comment). Sections and
/// keys, with defaults:
///
///   [experiment]  type = risk | subspace, name, methods (comma list),
///                 sweep = n_tasks | m_per_task, values (comma list),
///                 repetitions = 30, seed = 0, rank (default: generator rank)
///   [generator]   kind = fourier | spherical | lowrank_fourier | mom_setup | school,
///                 d, n_tasks, m_per_task (one value or a comma list),
///                 n_test_tasks = 100, m_test_adapt = 10, m_test_eval = 100, rank = 5
///   [school]      path, schema, n_env_schools = 100, train_fraction = 0.8,
///                 standardize = false
///   [em]          rel_tol = 1e-6, max_iter = 1000
///   [cv]          n_folds = 10, n_lambda = 50, lambda_low = 1e-3,
///                 lambda_high = 100, n_splits_per_task = 10
///
/// Unknown sections or keys are errors. Relative School paths resolve
/// against the directory of the config file.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir = {});

}  // namespace gaussmeta
