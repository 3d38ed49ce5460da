#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gaussmeta/core.hpp"
#include "gaussmeta/simgen.hpp"

namespace gaussmeta {

/// Sidecar schema (JSON) naming the roles of the CSV columns:
///
///   {
///     "task_column": "School",
///     "target_column": "ExamScore",
///     "features": [{"name": "Year", "type": "categorical"},
///                  {"name": "FSM", "type": "numeric"}, ...],
///     "expected_features": 27
///   }
///
/// Numeric features become one column each. A categorical feature becomes
/// one indicator column per distinct level, levels sorted numerically when
/// every level parses as a number and lexicographically otherwise.
/// Encoded columns follow the order of "features".
struct SchoolSchema {
  struct Feature {
    std::string name;
    bool categorical;
  };
  std::string task_column;
  std::string target_column;
  std::vector<Feature> features;
  int expected_features = 27;
};

SchoolSchema load_school_schema(const std::filesystem::path& path);

struct SchoolConfig {
  std::filesystem::path path;
  /// Defaults to `path` with ".schema.json" appended.
  std::filesystem::path schema_path;
  int n_env_schools = 100;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  /// z-score every feature with moments of the environment schools only.
  bool standardize = false;

  void validate() const;
};

struct SchoolData {
  Dataset env_tasks;
  std::vector<TestTask> targets;
  std::vector<std::string> feature_names;
  std::vector<std::string> env_school_ids;
  std::vector<std::string> target_school_ids;
};

/// One task per school. Schools (sorted by id) are shuffled with cfg.seed;
/// the first n_env_schools form the environment set and each remaining school
/// is split into round(train_fraction * m) adaptation rows and the rest for
/// evaluation. Throws Parse with the line number on malformed input and
/// InvalidArgument listing the encoded columns when their count differs from
/// expected_features.
SchoolData load_school(const SchoolConfig& cfg);

}  // namespace gaussmeta
