#include "gaussmeta/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <thread>

#include "gaussmeta/bounds.hpp"
#include "gaussmeta/dataset_io.hpp"
#include "gaussmeta/em.hpp"
#include "gaussmeta/error.hpp"
#include "gaussmeta/estimators.hpp"

namespace gaussmeta {

const std::vector<std::string>& risk_methods() {
  static const std::vector<std::string> names{"lr_all", "lr_task", "biased_regression", "em_learner",
                                              "oracle_wbrls", "oracle_representation", "mom",
                                              "known_cov_lower_bound"};
  return names;
}

const std::vector<std::string>& subspace_methods() {
  static const std::vector<std::string> names{"em_clip", "mom"};
  return names;
}

namespace {

bool needs_truth(const std::string& method) {
  return method == "oracle_wbrls" || method == "oracle_representation" || method == "known_cov_lower_bound";
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void ExperimentConfig::validate() const {
  if (methods.empty()) throw Error(ErrorKind::InvalidArgument, "methods must be non-empty");
  const auto& allowed = type == ExperimentType::Risk ? risk_methods() : subspace_methods();
  for (const auto& m : methods) {
    if (std::find(allowed.begin(), allowed.end(), m) == allowed.end()) {
      throw Error(ErrorKind::InvalidArgument, "unknown method '" + m + "' for this experiment type");
    }
  }
  if (sweep != "n_tasks" && sweep != "m_per_task") {
    throw Error(ErrorKind::InvalidArgument, "sweep must be n_tasks or m_per_task");
  }
  if (sweep_values.empty()) throw Error(ErrorKind::InvalidArgument, "sweep values must be non-empty");
  for (std::size_t i = 0; i < sweep_values.size(); ++i) {
    if (sweep_values[i] < 1) throw Error(ErrorKind::InvalidArgument, "sweep values must be positive");
    if (i > 0 && sweep_values[i] <= sweep_values[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "sweep values must be increasing");
    }
  }
  if (n_repetitions < 1) throw Error(ErrorKind::InvalidArgument, "repetitions must be positive");
  if (representation_rank < 1) throw Error(ErrorKind::InvalidArgument, "representation rank must be positive");
  if (!(em_rel_tol > 0.0) || em_max_iter < 1) throw Error(ErrorKind::InvalidArgument, "invalid EM settings");
  if (threads < 1) throw Error(ErrorKind::InvalidArgument, "threads must be positive");
  cv.validate();

  if (const auto* school = std::get_if<SchoolConfig>(&generator)) {
    school->validate();
    if (type == ExperimentType::Subspace) throw Error(ErrorKind::InvalidArgument, "subspace experiments need mom_setup");
    if (sweep != "n_tasks") throw Error(ErrorKind::InvalidArgument, "the School data only sweeps n_tasks");
    if (sweep_values.back() > school->n_env_schools) {
      throw Error(ErrorKind::InvalidArgument, "n_tasks sweep exceeds the environment schools");
    }
    for (const auto& m : methods) {
      if (needs_truth(m)) throw Error(ErrorKind::InvalidArgument, "method '" + m + "' needs a synthetic environment");
    }
    return;
  }
  const GenSpec& spec = std::get<GenSpec>(generator);
  spec.validate();
  if (type == ExperimentType::Subspace && spec.kind != GenKind::MomSetup) {
    throw Error(ErrorKind::InvalidArgument, "subspace experiments need the mom_setup generator");
  }
  const bool uses_rank = std::any_of(methods.begin(), methods.end(), [](const std::string& m) {
    return m == "oracle_representation" || m == "mom" || m == "em_clip";
  });
  if (uses_rank && representation_rank > spec.d) throw Error(ErrorKind::InvalidArgument, "representation rank exceeds d");
  if (type == ExperimentType::Risk && (spec.n_test_tasks < 1 || spec.m_test_eval < 1)) {
    throw Error(ErrorKind::InvalidArgument, "risk experiments need test tasks with evaluation rows");
  }
  if (sweep == "m_per_task" && spec.m_per_task.size() != 1) {
    throw Error(ErrorKind::InvalidArgument, "sweeping m_per_task needs a single base task size");
  }
}

double mean_squared_error(const VectorXd& theta, const TaskData& eval) {
  if (eval.m() == 0) throw Error(ErrorKind::InvalidArgument, "evaluation split is empty");
  return (eval.Y() - eval.X() * theta).squaredNorm() / static_cast<double>(eval.m());
}

std::vector<SummaryRow> ResultTable::summary() const {
  std::vector<std::pair<std::string, int>> keys;
  std::map<std::pair<std::string, int>, std::vector<double>> values;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.method, r.sweep_value);
    auto [it, fresh] = values.try_emplace(key);
    if (fresh) keys.push_back(key);
    if (r.status == "ok") it->second.push_back(r.value);
  }
  std::vector<SummaryRow> out;
  for (const auto& key : keys) {
    const auto& v = values[key];
    SummaryRow s{key.first, key.second, kNaN, kNaN, static_cast<int>(v.size())};
    if (!v.empty()) {
      double sum = 0.0;
      for (double x : v) sum += x;
      s.mean = sum / static_cast<double>(v.size());
    }
    if (v.size() >= 2) {
      double ss = 0.0;
      for (double x : v) ss += (x - s.mean) * (x - s.mean);
      s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return a.sweep_value < b.sweep_value;
  });
  return out;
}

double ResultTable::mean(const std::string& method, int sweep_value) const {
  for (const auto& s : summary()) {
    if (s.method == method && s.sweep_value == sweep_value) return s.mean;
  }
  return kNaN;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void ResultTable::write_csv(std::ostream& out) const {
  out << "method," << sweep_param << ",repetition," << value_name << ",status\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.sweep_value << ',' << r.repetition << ',' << format_double(r.value) << ','
        << csv_field(r.status) << '\n';
  }
}

void ResultTable::write_summary_csv(std::ostream& out) const {
  out << "method," << sweep_param << ",mean,std,count\n";
  for (const auto& s : summary()) {
    out << s.method << ',' << s.sweep_value << ',' << format_double(s.mean) << ',' << format_double(s.std) << ','
        << s.count << '\n';
  }
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

namespace {

constexpr std::uint64_t kEnvKey = 0xE1;
constexpr std::uint64_t kDataKey = 0xDA;
constexpr std::uint64_t kCvKey = 0xC5;
constexpr std::uint64_t kSplitKey = 0x5B;

std::string error_tag(const std::exception& e) {
  if (const auto* ge = dynamic_cast<const Error*>(&e)) {
    return "error:" + std::string(to_string(ge->kind())) + ":" + ge->what();
  }
  return std::string("error:exception:") + e.what();
}

/// Everything a cell needs: source tasks, test tasks and, for synthetic
/// data, the true environment.
struct CellData {
  Dataset sources;
  std::vector<TestTask> tests;
  std::optional<Environment> truth;
  MatrixXd truth_basis;
};

double average_over_tests(const std::vector<TestTask>& tests,
                          const std::function<VectorXd(const TaskData&)>& adapt) {
  if (tests.empty()) throw Error(ErrorKind::InvalidArgument, "no test tasks");
  double acc = 0.0;
  for (const TestTask& t : tests) acc += mean_squared_error(adapt(t.adapt), t.eval);
  return acc / static_cast<double>(tests.size());
}

VectorXd fit_in_basis(const TaskData& task, const MatrixXd& basis) {
  return oracle_representation(task, RepresentationBasis{basis});
}

double run_risk_method(const std::string& method, const CellData& cell, const ExperimentConfig& cfg,
                       std::uint64_t cv_seed) {
  const Dataset& src = cell.sources;
  const auto& tests = cell.tests;
  if (method == "lr_all") {
    const VectorXd w = pooled_bias(src);
    return average_over_tests(tests, [&](const TaskData&) { return w; });
  }
  if (method == "lr_task") {
    return average_over_tests(tests, [](const TaskData& t) { return ols(t); });
  }
  if (method == "biased_regression") {
    const VectorXd bias = pooled_bias(src);
    CvConfig cv = cfg.cv;
    cv.seed = cv_seed;
    const int target_m = static_cast<int>(tests.front().adapt.m());
    const double lambda = select_lambda(src, cv, std::max(1, target_m));
    return average_over_tests(tests, [&](const TaskData& t) { return biased_regression(t, bias, lambda); });
  }
  if (method == "em_learner") {
    EmConfig em;
    em.rel_tol = cfg.em_rel_tol;
    em.max_iter = cfg.em_max_iter;
    const Environment fitted = em_fit(src, em).env;
    const PosteriorSolver solver(fitted);
    return average_over_tests(tests, [&](const TaskData& t) { return solver(t).mu; });
  }
  if (method == "mom") {
    const MatrixXd basis = mom_estimator(src, cfg.representation_rank).B;
    return average_over_tests(tests, [&](const TaskData& t) { return fit_in_basis(t, basis); });
  }

  if (!cell.truth) throw Error(ErrorKind::InvalidArgument, "method '" + method + "' needs the true environment");
  const Environment& env = *cell.truth;
  if (method == "oracle_representation") {
    const MatrixXd basis = rank_clip(env.Sigma(), cfg.representation_rank).basis;
    return average_over_tests(tests, [&](const TaskData& t) { return fit_in_basis(t, basis); });
  }
  const AlphaNormalEquations source_eq = alpha_normal_equations(src.span(), env.sigma2(), env.Sigma());
  if (method == "oracle_wbrls") {
    return average_over_tests(tests, [&](const TaskData& t) {
      AlphaNormalEquations eq = source_eq;
      eq += alpha_normal_equations(std::span<const TaskData>(&t, 1), env.sigma2(), env.Sigma());
      return plug_in_theta(eq.solve(), t, env.sigma2(), env.Sigma());
    });
  }
  if (method == "known_cov_lower_bound") {
    const PosteriorSolver solver(env);
    double acc = 0.0;
    for (const TestTask& t : tests) {
      if (t.eval.m() == 0) throw Error(ErrorKind::InvalidArgument, "evaluation split is empty");
      AlphaNormalEquations eq = source_eq;
      eq += alpha_normal_equations(std::span<const TaskData>(&t.adapt, 1), env.sigma2(), env.Sigma());
      const MatrixXd m = matrix_M_from_information(eq.information, t.adapt.gram(), env.sigma2(), env.Sigma());
      const MatrixXd tau = solver.covariance(t.adapt.X());
      acc += env.sigma2() + (m + tau).cwiseProduct(t.eval.gram()).sum() / static_cast<double>(t.eval.m());
    }
    return acc / static_cast<double>(tests.size());
  }
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + method + "'");
}

GenSpec cell_spec(const ExperimentConfig& cfg, const GenSpec& base, int value, std::uint64_t data_seed) {
  GenSpec spec = base;
  if (cfg.sweep == "n_tasks") {
    spec.n_tasks = value;
    if (spec.m_per_task.size() != 1) spec.m_per_task.resize(static_cast<std::size_t>(value), spec.m_per_task.back());
  } else {
    spec.m_per_task = {value};
  }
  spec.seed = data_seed;
  return spec;
}

CellData make_cell(const ExperimentConfig& cfg, int rep, std::size_t sweep_idx) {
  const int value = cfg.sweep_values[sweep_idx];
  const auto r = static_cast<std::uint64_t>(rep);
  if (const auto* school = std::get_if<SchoolConfig>(&cfg.generator)) {
    SchoolConfig sc = *school;
    sc.seed = derived_seed({cfg.seed, r, kSplitKey});
    SchoolData data = load_school(sc);
    std::vector<TaskData> subset(data.env_tasks.tasks().begin(), data.env_tasks.tasks().begin() + value);
    return {Dataset(std::move(subset)), std::move(data.targets), std::nullopt, {}};
  }
  const GenSpec& base = std::get<GenSpec>(cfg.generator);
  Rng env_rng = derived_rng({cfg.seed, r, kEnvKey});
  GeneratedEnvironment env = gen_environment(base, env_rng);
  const GenSpec spec = cell_spec(cfg, base, value, derived_seed({cfg.seed, r, static_cast<std::uint64_t>(sweep_idx), kDataKey}));
  GeneratedData data = gen_dataset(spec, env.env);
  return {std::move(data.train), std::move(data.test), std::move(env.env), std::move(env.basis)};
}

template <typename MethodFn>
ResultTable run_cells(const ExperimentConfig& cfg, const std::string& value_name, MethodFn&& method_fn) {
  const std::size_t n_sweep = cfg.sweep_values.size();
  const std::size_t n_cells = n_sweep * static_cast<std::size_t>(cfg.n_repetitions);
  const std::size_t n_methods = cfg.methods.size();
  std::vector<ResultRow> rows(n_cells * n_methods);

  parallel_for(n_cells, cfg.threads, [&](std::size_t c) {
    const std::size_t sweep_idx = c / static_cast<std::size_t>(cfg.n_repetitions);
    const int rep = static_cast<int>(c % static_cast<std::size_t>(cfg.n_repetitions));
    const int value = cfg.sweep_values[sweep_idx];
    for (std::size_t k = 0; k < n_methods; ++k) rows[c * n_methods + k] = {cfg.methods[k], value, rep, kNaN, "ok"};
    std::optional<CellData> cell;
    try {
      cell.emplace(make_cell(cfg, rep, sweep_idx));
    } catch (const std::exception& e) {
      for (std::size_t k = 0; k < n_methods; ++k) rows[c * n_methods + k].status = error_tag(e);
      return;
    }
    const std::uint64_t cv_seed = derived_seed({cfg.seed, static_cast<std::uint64_t>(rep), sweep_idx, kCvKey});
    for (std::size_t k = 0; k < n_methods; ++k) {
      ResultRow& row = rows[c * n_methods + k];
      try {
        row.value = method_fn(cfg.methods[k], *cell, cv_seed);
        if (!std::isfinite(row.value)) throw Error(ErrorKind::Numerical, "non-finite result");
      } catch (const std::exception& e) {
        row.value = kNaN;
        row.status = error_tag(e);
      }
    }
  });
  return {cfg.sweep, value_name, std::move(rows)};
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.type != ExperimentType::Risk) throw Error(ErrorKind::InvalidArgument, "not a risk experiment");
  return run_cells(cfg, "mean_test_error", [&](const std::string& method, const CellData& cell, std::uint64_t cv_seed) {
    return run_risk_method(method, cell, cfg, cv_seed);
  });
}

ResultTable run_subspace_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.type != ExperimentType::Subspace) throw Error(ErrorKind::InvalidArgument, "not a subspace experiment");
  return run_cells(cfg, "d_max", [&](const std::string& method, const CellData& cell, std::uint64_t) {
    MatrixXd estimate;
    if (method == "em_clip") {
      EmConfig em;
      em.rel_tol = cfg.em_rel_tol;
      em.max_iter = cfg.em_max_iter;
      estimate = rank_clip(em_fit(cell.sources, em).env.Sigma(), cfg.representation_rank).basis;
    } else {
      estimate = mom_estimator(cell.sources, cfg.representation_rank).B;
    }
    return max_correlation(estimate, cell.truth_basis);
  });
}

}  // namespace gaussmeta
