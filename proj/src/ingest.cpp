#include "gaussmeta/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "gaussmeta/dataset_io.hpp"
#include "gaussmeta/error.hpp"

namespace gaussmeta {

SchoolSchema load_school_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open schema '" + path.string() + "'");
  SchoolSchema s;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    s.task_column = j.at("task_column").get<std::string>();
    s.target_column = j.at("target_column").get<std::string>();
    for (const auto& f : j.at("features")) {
      const std::string type = f.at("type").get<std::string>();
      if (type != "categorical" && type != "numeric") {
        throw Error(ErrorKind::Parse, "feature type must be categorical or numeric, got '" + type + "'");
      }
      s.features.push_back({f.at("name").get<std::string>(), type == "categorical"});
    }
    s.expected_features = j.value("expected_features", 27);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, "schema '" + path.string() + "': " + e.what());
  }
  if (s.features.empty()) throw Error(ErrorKind::Parse, "schema lists no features");
  return s;
}

void SchoolConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "train_fraction must lie in (0, 1)");
  }
  if (n_env_schools < 1) throw Error(ErrorKind::InvalidArgument, "n_env_schools must be positive");
}

namespace {

std::size_t column_of(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorKind::Parse, "column '" + name + "' missing from header").with_line(1);
  return static_cast<std::size_t>(it - header.begin());
}

bool all_numeric(const std::set<std::string>& levels) {
  for (const auto& l : levels) {
    try {
      parse_double(l);
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> sorted_levels(const std::set<std::string>& levels) {
  std::vector<std::string> out(levels.begin(), levels.end());
  if (all_numeric(levels)) {
    std::stable_sort(out.begin(), out.end(),
                     [](const std::string& a, const std::string& b) { return parse_double(a) < parse_double(b); });
  }
  return out;
}

struct RawRow {
  std::vector<std::string> fields;
  std::size_t line;
};

}  // namespace

SchoolData load_school(const SchoolConfig& cfg) {
  cfg.validate();
  const std::filesystem::path schema_path =
      cfg.schema_path.empty() ? std::filesystem::path(cfg.path.string() + ".schema.json") : cfg.schema_path;
  const SchoolSchema schema = load_school_schema(schema_path);

  std::ifstream in(cfg.path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + cfg.path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty file").with_line(1);
  const auto header = split_csv_record(line);
  const std::size_t task_col = column_of(header, schema.task_column);
  const std::size_t target_col = column_of(header, schema.target_column);
  std::vector<std::size_t> feature_cols;
  for (const auto& f : schema.features) feature_cols.push_back(column_of(header, f.name));

  std::vector<RawRow> raw;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      auto fields = split_csv_record(line);
      if (fields.size() != header.size()) {
        throw Error(ErrorKind::Parse, "expected " + std::to_string(header.size()) + " fields, got " +
                                          std::to_string(fields.size()));
      }
      parse_double(fields[target_col]);
      for (std::size_t k = 0; k < schema.features.size(); ++k) {
        if (!schema.features[k].categorical) parse_double(fields[feature_cols[k]]);
      }
      raw.push_back({std::move(fields), line_no});
    } catch (Error& e) {
      throw e.with_line(line_no);
    }
  }
  if (raw.empty()) throw Error(ErrorKind::Parse, "no data rows").with_line(line_no);

  // Encoded layout.
  std::vector<std::string> names;
  std::vector<std::map<std::string, Index>> level_index(schema.features.size());
  std::vector<Index> offset(schema.features.size());
  for (std::size_t k = 0; k < schema.features.size(); ++k) {
    offset[k] = static_cast<Index>(names.size());
    const auto& f = schema.features[k];
    if (!f.categorical) {
      names.push_back(f.name);
      continue;
    }
    std::set<std::string> levels;
    for (const auto& r : raw) levels.insert(r.fields[feature_cols[k]]);
    Index idx = 0;
    for (const auto& l : sorted_levels(levels)) {
      level_index[k][l] = idx++;
      names.push_back(f.name + "=" + l);
    }
  }
  if (static_cast<int>(names.size()) != schema.expected_features) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw Error(ErrorKind::InvalidArgument, "encoding yields " + std::to_string(names.size()) +
                                                " features, expected " +
                                                std::to_string(schema.expected_features) + ": " + list);
  }
  const Index d = static_cast<Index>(names.size());

  std::map<std::string, std::vector<std::size_t>> by_school;
  for (std::size_t r = 0; r < raw.size(); ++r) by_school[raw[r].fields[task_col]].push_back(r);

  auto encode = [&](const std::vector<std::size_t>& rows) {
    MatrixXd x = MatrixXd::Zero(static_cast<Index>(rows.size()), d);
    VectorXd y(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& fields = raw[rows[i]].fields;
      const Index ri = static_cast<Index>(i);
      for (std::size_t k = 0; k < schema.features.size(); ++k) {
        const std::string& v = fields[feature_cols[k]];
        if (schema.features[k].categorical) {
          x(ri, offset[k] + level_index[k].at(v)) = 1.0;
        } else {
          x(ri, offset[k]) = parse_double(v);
        }
      }
      y(ri) = parse_double(fields[target_col]);
    }
    return TaskData(std::move(x), std::move(y));
  };

  std::vector<std::string> ids;
  for (const auto& kv : by_school) ids.push_back(kv.first);
  if (static_cast<int>(ids.size()) <= cfg.n_env_schools) {
    throw Error(ErrorKind::InvalidArgument, "need more than " + std::to_string(cfg.n_env_schools) +
                                                " schools, found " + std::to_string(ids.size()));
  }
  Rng rng = derived_rng({cfg.seed, 0x5c4001});
  std::shuffle(ids.begin(), ids.end(), rng);

  SchoolData out{Dataset({TaskData(MatrixXd(0, d), VectorXd(0))}), {}, names, {}, {}};
  std::vector<TaskData> env;
  for (int i = 0; i < cfg.n_env_schools; ++i) {
    env.push_back(encode(by_school[ids[i]]));
    out.env_school_ids.push_back(ids[i]);
  }
  for (std::size_t i = cfg.n_env_schools; i < ids.size(); ++i) {
    std::vector<std::size_t> rows = by_school[ids[i]];
    if (rows.size() < 2) {
      throw Error(ErrorKind::InvalidArgument, "target school '" + ids[i] + "' has fewer than two rows");
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    const std::size_t n_adapt = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(cfg.train_fraction * static_cast<double>(rows.size()))), 1,
        rows.size() - 1);
    const std::vector<std::size_t> adapt(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_adapt));
    const std::vector<std::size_t> eval(rows.begin() + static_cast<std::ptrdiff_t>(n_adapt), rows.end());
    out.targets.push_back({encode(adapt), encode(eval)});
    out.target_school_ids.push_back(ids[i]);
  }

  if (cfg.standardize) {
    VectorXd mean = VectorXd::Zero(d);
    VectorXd sq = VectorXd::Zero(d);
    double count = 0.0;
    for (const auto& t : env) {
      mean += t.X().colwise().sum().transpose();
      sq += t.X().array().square().colwise().sum().matrix().transpose();
      count += static_cast<double>(t.m());
    }
    mean /= count;
    VectorXd sd = (sq / count - mean.array().square().matrix()).cwiseMax(0.0).cwiseSqrt();
    for (Index j = 0; j < d; ++j) {
      if (!(sd(j) > 0.0)) sd(j) = 1.0;
    }
    auto scale = [&](const TaskData& t) {
      MatrixXd x = (t.X().rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
      return TaskData(std::move(x), t.Y());
    };
    for (auto& t : env) t = scale(t);
    for (auto& tt : out.targets) tt = {scale(tt.adapt), scale(tt.eval)};
  }
  out.env_tasks = Dataset(std::move(env));
  return out;
}

}  // namespace gaussmeta
