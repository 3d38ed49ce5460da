#include "gaussmeta/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gaussmeta/error.hpp"

namespace gaussmeta {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T convert(const std::string& key, const std::string& text) {
  std::istringstream ss(trim(text));
  T v{};
  ss >> v;
  if (ss.fail() || !ss.eof()) throw Error(ErrorKind::Parse, "bad value '" + text + "' for key '" + key + "'");
  return v;
}

template <>
bool convert<bool>(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw Error(ErrorKind::Parse, "bad boolean '" + text + "' for key '" + key + "'");
}

std::vector<int> int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) out.push_back(convert<int>(key, item));
  if (out.empty()) throw Error(ErrorKind::Parse, "empty list for key '" + key + "'");
  return out;
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool present() const { return tree_ != nullptr; }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!tree_) return fallback;
    const auto v = tree_->get_optional<std::string>(key);
    return v ? convert<T>(name_ + "." + key, *v) : fallback;
  }

  std::optional<std::string> raw(const std::string& key) const {
    if (!tree_) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(key);
    return v ? std::optional<std::string>(trim(*v)) : std::nullopt;
  }

  void check_keys(const std::set<std::string>& allowed) const {
    if (!tree_) return;
    for (const auto& kv : *tree_) {
      if (!allowed.count(kv.first)) throw Error(ErrorKind::Parse, "unknown key '" + name_ + "." + kv.first + "'");
    }
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

Section section(const pt::ptree& root, const std::string& name) {
  const auto child = root.get_child_optional(name);
  return Section(child ? &*child : nullptr, name);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::Parse, e.message()).with_line(e.line());
  }
  for (const auto& kv : root) {
    static const std::set<std::string> known{"experiment", "generator", "school", "em", "cv"};
    if (!known.count(kv.first)) throw Error(ErrorKind::Parse, "unknown section '" + kv.first + "'");
  }

  const Section exp = section(root, "experiment");
  const Section gen = section(root, "generator");
  const Section school = section(root, "school");
  const Section em = section(root, "em");
  const Section cv = section(root, "cv");
  if (!exp.present()) throw Error(ErrorKind::Parse, "missing [experiment] section");
  if (!gen.present()) throw Error(ErrorKind::Parse, "missing [generator] section");
  exp.check_keys({"type", "name", "methods", "sweep", "values", "repetitions", "seed", "rank"});
  gen.check_keys({"kind", "d", "n_tasks", "m_per_task", "n_test_tasks", "m_test_adapt", "m_test_eval", "rank"});
  school.check_keys({"path", "schema", "n_env_schools", "train_fraction", "standardize"});
  em.check_keys({"rel_tol", "max_iter"});
  cv.check_keys({"n_folds", "n_lambda", "lambda_low", "lambda_high", "n_splits_per_task"});

  ExperimentConfig cfg;
  const std::string type = exp.get<std::string>("type", "risk");
  if (type == "risk") {
    cfg.type = ExperimentType::Risk;
  } else if (type == "subspace") {
    cfg.type = ExperimentType::Subspace;
  } else {
    throw Error(ErrorKind::Parse, "experiment.type must be risk or subspace");
  }
  cfg.name = exp.get<std::string>("name", cfg.name);
  cfg.methods = split_list(exp.raw("methods").value_or(""));
  cfg.sweep = exp.get<std::string>("sweep", cfg.sweep);
  const auto values = exp.raw("values");
  if (!values) throw Error(ErrorKind::Parse, "missing experiment.values");
  cfg.sweep_values = int_list("experiment.values", *values);
  cfg.n_repetitions = exp.get<int>("repetitions", cfg.n_repetitions);
  cfg.seed = exp.get<std::uint64_t>("seed", cfg.seed);

  const auto kind = gen.raw("kind");
  if (!kind) throw Error(ErrorKind::Parse, "missing generator.kind");
  int generator_rank = gen.get<int>("rank", 5);
  if (*kind == "school") {
    SchoolConfig sc;
    const auto path = school.raw("path");
    if (!path) throw Error(ErrorKind::Parse, "missing school.path");
    sc.path = base_dir / *path;
    if (const auto schema = school.raw("schema")) sc.schema_path = base_dir / *schema;
    sc.n_env_schools = school.get<int>("n_env_schools", sc.n_env_schools);
    sc.train_fraction = school.get<double>("train_fraction", sc.train_fraction);
    sc.standardize = school.get<bool>("standardize", sc.standardize);
    cfg.generator = sc;
  } else {
    GenSpec spec;
    spec.kind = parse_gen_kind(*kind);
    spec.d = gen.get<int>("d", spec.kind == GenKind::Spherical ? 42 : spec.kind == GenKind::MomSetup ? 100 : 11);
    spec.n_tasks = gen.get<int>("n_tasks", spec.n_tasks);
    if (const auto m = gen.raw("m_per_task")) spec.m_per_task = int_list("generator.m_per_task", *m);
    spec.n_test_tasks = gen.get<int>("n_test_tasks", spec.n_test_tasks);
    spec.m_test_adapt = gen.get<int>("m_test_adapt", spec.m_test_adapt);
    spec.m_test_eval = gen.get<int>("m_test_eval", spec.m_test_eval);
    spec.rank = generator_rank;
    cfg.generator = spec;
  }
  cfg.representation_rank = exp.get<int>("rank", generator_rank);

  cfg.em_rel_tol = em.get<double>("rel_tol", cfg.em_rel_tol);
  cfg.em_max_iter = em.get<int>("max_iter", cfg.em_max_iter);
  cfg.cv.n_folds = cv.get<int>("n_folds", cfg.cv.n_folds);
  cfg.cv.n_lambda = cv.get<int>("n_lambda", cfg.cv.n_lambda);
  cfg.cv.lambda_low = cv.get<double>("lambda_low", cfg.cv.lambda_low);
  cfg.cv.lambda_high = cv.get<double>("lambda_high", cfg.cv.lambda_high);
  cfg.cv.n_splits_per_task = cv.get<int>("n_splits_per_task", cfg.cv.n_splits_per_task);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path.string() + "'");
  return parse_experiment_config(in, path.parent_path());
}

}  // namespace gaussmeta
