#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "gaussmeta/bounds.hpp"
#include "gaussmeta/config.hpp"
#include "gaussmeta/dataset_io.hpp"
#include "gaussmeta/em.hpp"
#include "gaussmeta/error.hpp"
#include "gaussmeta/harness.hpp"
#include "gaussmeta/simgen.hpp"

using namespace gaussmeta;
using nlohmann::json;

namespace {

json to_json(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const MatrixXd& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(to_json(VectorXd(m.row(i).transpose())));
  return out;
}

VectorXd vector_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorKind::Parse, what + " must be an array of numbers");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

MatrixXd matrix_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorKind::Parse, what + " must be an array of rows");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw Error(ErrorKind::Parse, what + " rows must have equal length");
    }
    for (Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

/// Writes to the file at path, or to stdout when path is empty.
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write(out);
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("'") + path + "': " + e.what());
  }
}

struct SimulateArgs {
  std::string kind = "fourier";
  std::optional<int> d;
  int n_tasks = 10;
  int m = 10;
  int rank = 5;
  int n_test_tasks = 0;
  int m_test_adapt = 10;
  int m_test_eval = 100;
  std::string env_out;
  std::string test_out;
};

int run_simulate(const SimulateArgs& a, std::uint64_t seed, const std::string& out) {
  GenSpec spec;
  spec.kind = parse_gen_kind(a.kind);
  spec.d = a.d.value_or(spec.kind == GenKind::Spherical ? 42 : spec.kind == GenKind::MomSetup ? 100 : 11);
  spec.n_tasks = a.n_tasks;
  spec.m_per_task = {a.m};
  spec.rank = a.rank;
  spec.n_test_tasks = a.n_test_tasks;
  spec.m_test_adapt = a.m_test_adapt;
  spec.m_test_eval = a.m_test_eval;
  spec.seed = seed;
  Rng rng = derived_rng({seed, 0xE1});
  const GeneratedEnvironment env = gen_environment(spec, rng);
  const GeneratedData data = gen_dataset(spec, env.env);
  emit(out, [&](std::ostream& os) { write_dataset_csv(os, data.train); });
  if (!a.env_out.empty()) {
    json j{{"alpha", to_json(env.env.alpha())}, {"sigma2", env.env.sigma2()}, {"Sigma", to_json(env.env.Sigma())}};
    if (env.basis.size() > 0) j["basis"] = to_json(env.basis);
    emit(a.env_out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }
  if (!a.test_out.empty() && !data.test.empty()) {
    std::vector<TaskData> adapt;
    std::vector<TaskData> eval;
    for (const auto& t : data.test) {
      adapt.push_back(t.adapt);
      eval.push_back(t.eval);
    }
    write_dataset_csv(a.test_out + "_adapt.csv", Dataset(std::move(adapt)));
    write_dataset_csv(a.test_out + "_eval.csv", Dataset(std::move(eval)));
  }
  return 0;
}

struct FitEmArgs {
  std::string data;
  std::string trace;
  double rel_tol = 1e-6;
  int max_iter = 1000;
};

int run_fit_em(const FitEmArgs& a, const std::string& out) {
  const Dataset ds = read_dataset_csv(a.data);
  EmConfig cfg;
  cfg.rel_tol = a.rel_tol;
  cfg.max_iter = a.max_iter;
  std::ofstream trace;
  if (!a.trace.empty()) {
    trace.open(a.trace);
    if (!trace) throw Error(ErrorKind::Io, "cannot open '" + a.trace + "' for writing");
    cfg.on_iteration = [&](const EmIterationRecord& r) {
      trace << json{{"iteration", r.iteration}, {"log_likelihood", r.log_likelihood},
                    {"relative_change", r.relative_change}}.dump()
            << '\n';
    };
  }
  const EmResult res = em_fit(ds, cfg);
  json j{{"alpha", to_json(res.env.alpha())},
         {"sigma2", res.env.sigma2()},
         {"Sigma", to_json(res.env.Sigma())},
         {"iterations", res.trace.iterations},
         {"converged", res.trace.converged},
         {"log_likelihoods", res.trace.log_likelihoods}};
  emit(out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  return 0;
}

int run_bounds(const std::string& input, const std::string& out) {
  const json j = read_json_file(input);
  BoundReport r;
  try {
    const double sigma2 = j.at("sigma2").get<double>();
    const MatrixXd sigma = matrix_from(j.at("Sigma"), "Sigma");
    std::vector<MatrixXd> designs;
    for (const auto& d : j.at("designs")) designs.push_back(matrix_from(d, "design"));
    const VectorXd x = vector_from(j.at("x"), "x");
    const std::vector<double> deltas = j.value("deltas", std::vector<double>{});
    r = bound_report(designs, sigma2, sigma, x, deltas);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("bounds input: ") + e.what());
  }
  json hp = json::array();
  for (const auto& h : r.highprob) {
    hp.push_back({{"delta", h.delta},
                  {"lower_coefficient", h.lower_coefficient},
                  {"upper_coefficient", h.upper_coefficient},
                  {"lower", h.lower},
                  {"upper", h.upper}});
  }
  json o{{"xMx", r.xMx},
         {"xTx", r.xTx},
         {"sigma2", r.sigma2},
         {"expected_risk_mle", r.expected_risk_mle},
         {"lower_unbiased", r.lower_unbiased},
         {"lower_all", r.lower_all},
         {"highprob", hp}};
  emit(out, [&](std::ostream& os) { os << o.dump(2) << '\n'; });
  return 0;
}

int run_table(const std::string& config, std::optional<std::uint64_t> seed, int threads, const std::string& out,
              const std::string& summary, ExperimentType want) {
  ExperimentConfig cfg = load_experiment_config(config);
  if (seed) cfg.seed = *seed;
  cfg.threads = threads;
  if (cfg.type != want) {
    throw Error(ErrorKind::InvalidArgument, want == ExperimentType::Risk ? "config describes a subspace experiment"
                                                                         : "config describes a risk experiment");
  }
  const ResultTable table = want == ExperimentType::Risk ? run_experiment(cfg) : run_subspace_experiment(cfg);
  emit(out, [&](std::ostream& os) { table.write_csv(os); });
  if (!summary.empty()) emit(summary, [&](std::ostream& os) { table.write_summary_csv(os); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian meta-learning for fixed-design linear regression"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
  std::string config;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "output file (default: stdout)");
    if (needs_config) sub->add_option("--config", config, "input file")->required();
  };

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "draw an environment and emit a dataset CSV");
  add_common(simulate, false);
  simulate->add_option("--kind", sim.kind, "fourier | spherical | lowrank_fourier | mom_setup");
  simulate->add_option("--d", sim.d, "dimension (fixed at 11 for Fourier kinds)");
  simulate->add_option("--n-tasks", sim.n_tasks, "source tasks");
  simulate->add_option("--m", sim.m, "samples per source task");
  simulate->add_option("--rank", sim.rank, "rank for lowrank_fourier and mom_setup");
  simulate->add_option("--n-test-tasks", sim.n_test_tasks, "test tasks");
  simulate->add_option("--m-test-adapt", sim.m_test_adapt, "adaptation rows per test task");
  simulate->add_option("--m-test-eval", sim.m_test_eval, "evaluation rows per test task");
  simulate->add_option("--env-out", sim.env_out, "write the true environment as JSON");
  simulate->add_option("--test-out", sim.test_out, "prefix for <prefix>_adapt.csv and <prefix>_eval.csv");

  FitEmArgs fit;
  auto* fit_em = app.add_subcommand("fit-em", "estimate the environment of a dataset CSV by EM");
  add_common(fit_em, false);
  fit_em->add_option("--data", fit.data, "dataset CSV")->required();
  fit_em->add_option("--trace", fit.trace, "per-iteration JSON lines");
  fit_em->add_option("--rel-tol", fit.rel_tol, "convergence threshold");
  fit_em->add_option("--max-iter", fit.max_iter, "iteration cap");

  auto* bounds = app.add_subcommand("bounds", "transfer-risk bounds for a JSON environment and designs");
  add_common(bounds, true);

  std::string summary;
  auto* run = app.add_subcommand("run", "run a risk experiment from an INI config");
  add_common(run, true);
  run->add_option("--summary", summary, "aggregated CSV");

  auto* subspace = app.add_subcommand("subspace", "run a subspace-recovery experiment from an INI config");
  add_common(subspace, true);
  subspace->add_option("--summary", summary, "aggregated CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*simulate) return run_simulate(sim, seed.value_or(0), out);
    if (*fit_em) return run_fit_em(fit, out);
    if (*bounds) return run_bounds(config, out);
    if (*run) return run_table(config, seed, threads, out, summary, ExperimentType::Risk);
    if (*subspace) return run_table(config, seed, threads, out, summary, ExperimentType::Subspace);
  } catch (const Error& e) {
    std::cerr << e.machine_line() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error kind=Internal message=\"" << e.what() << "\"\n";
    return 3;
  }
  return 1;
}
