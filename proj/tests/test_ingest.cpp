#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "gaussmeta/error.hpp"
#include "gaussmeta/ingest.hpp"

using namespace gaussmeta;

namespace {

const std::filesystem::path kData = GAUSSMETA_DATA_DIR;

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gaussmeta_ingest_" + name);
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

SchoolConfig mini(std::uint64_t seed = 1) {
  SchoolConfig cfg;
  cfg.path = kData / "school_mini.csv";
  cfg.n_env_schools = 2;
  cfg.train_fraction = 0.6;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("miniature fixture one-hot layout") {
    const SchoolData data = load_school(mini());
    const std::vector<std::string> names{"Year=1985", "Year=1986", "Gender=F", "Gender=M", "VR"};
    CHECK(data.feature_names == names);
    CHECK(data.env_tasks.n() == 2);
    CHECK(data.env_tasks.d() == 5);
    REQUIRE(data.targets.size() == 1);
    CHECK(data.env_school_ids.size() == 2);
    CHECK(data.target_school_ids.size() == 1);

    // Locate school B among the environment or target tasks and check its first row: 1985,F,3.0 -> 30.
    std::set<std::string> all(data.env_school_ids.begin(), data.env_school_ids.end());
    all.insert(data.target_school_ids.front());
    CHECK(all == std::set<std::string>{"A", "B", "C"});
    for (std::size_t i = 0; i < data.env_school_ids.size(); ++i) {
      if (data.env_school_ids[i] != "B") continue;
      const TaskData& b = data.env_tasks[i];
      REQUIRE(b.m() == 3);
      const Eigen::RowVectorXd expect = (Eigen::RowVectorXd(5) << 1, 0, 1, 0, 3.0).finished();
      CHECK(b.X().row(0) == expect);
      CHECK(b.Y()(0) == 30.0);
    }
    // Every encoded row has exactly one level per categorical feature.
    for (const auto& t : data.env_tasks) {
      for (Index r = 0; r < t.m(); ++r) {
        CHECK(t.X()(r, 0) + t.X()(r, 1) == 1.0);
        CHECK(t.X()(r, 2) + t.X()(r, 3) == 1.0);
      }
    }
  }

  TEST_CASE("target split is disjoint and follows the train fraction") {
    const SchoolData data = load_school(mini());
    const TestTask& t = data.targets.front();
    const Index total = t.adapt.m() + t.eval.m();
    const std::string id = data.target_school_ids.front();
    const Index expected_total = id == "A" ? 4 : id == "B" ? 3 : 5;
    CHECK(total == expected_total);
    CHECK(t.adapt.m() == std::clamp<Index>(std::lround(0.6 * expected_total), 1, expected_total - 1));
    // Rows are distinct in the fixture, so disjointness shows as no shared (x, y) row.
    for (Index i = 0; i < t.adapt.m(); ++i) {
      for (Index j = 0; j < t.eval.m(); ++j) {
        const bool same = t.adapt.X().row(i) == t.eval.X().row(j) && t.adapt.Y()(i) == t.eval.Y()(j);
        CHECK_FALSE(same);
      }
    }
  }

  TEST_CASE("fixed seed gives identical splits") {
    const SchoolData a = load_school(mini(5));
    const SchoolData b = load_school(mini(5));
    CHECK(a.env_school_ids == b.env_school_ids);
    CHECK(a.targets.front().adapt.X() == b.targets.front().adapt.X());
    CHECK(a.targets.front().eval.Y() == b.targets.front().eval.Y());
  }

  TEST_CASE("standardization uses environment moments only") {
    SchoolConfig cfg = mini();
    cfg.standardize = true;
    const SchoolData data = load_school(cfg);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(5);
    double count = 0;
    for (const auto& t : data.env_tasks) {
      mean += t.X().colwise().sum().transpose();
      count += static_cast<double>(t.m());
    }
    CHECK((mean / count).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("feature count mismatch lists the encoded columns") {
    const auto schema = scratch("bad.schema.json");
    write(schema, R"({"task_column":"School","target_column":"ExamScore",
      "features":[{"name":"Gender","type":"categorical"},{"name":"VR","type":"numeric"}],"expected_features":27})");
    SchoolConfig cfg = mini();
    cfg.schema_path = schema;
    try {
      load_school(cfg);
      FAIL("count mismatch accepted");
    } catch (const Error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("Gender=F") != std::string::npos);
      CHECK(msg.find("VR") != std::string::npos);
      CHECK(msg.find("27") != std::string::npos);
    }
  }

  TEST_CASE("parse errors carry the line number") {
    const auto csv = scratch("broken.csv");
    write(csv, "School,Year,Gender,VR,ExamScore\nA,1985,F,1.0,3\nA,1985,F,oops,4\n");
    SchoolConfig cfg = mini();
    cfg.path = csv;
    cfg.schema_path = kData / "school_mini.csv.schema.json";
    try {
      load_school(cfg);
      FAIL("bad number accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
      REQUIRE(e.line.has_value());
      CHECK(*e.line == 3);
    }
    cfg.path = scratch("missing.csv");
    std::filesystem::remove(cfg.path);
    CHECK_THROWS_AS(load_school(cfg), Error);
  }

  TEST_CASE("numeric category levels sort numerically") {
    const auto csv = scratch("levels.csv");
    write(csv, "School,Band,ExamScore\nA,10,1\nA,9,2\nB,2,3\nB,9,4\nC,10,5\nC,2,6\n");
    const auto schema = scratch("levels.schema.json");
    write(schema, R"({"task_column":"School","target_column":"ExamScore",
      "features":[{"name":"Band","type":"categorical"}],"expected_features":3})");
    SchoolConfig cfg;
    cfg.path = csv;
    cfg.schema_path = schema;
    cfg.n_env_schools = 2;
    const SchoolData data = load_school(cfg);
    CHECK(data.feature_names == std::vector<std::string>{"Band=2", "Band=9", "Band=10"});
  }

  TEST_CASE("config validation") {
    SchoolConfig cfg = mini();
    cfg.train_fraction = 1.0;
    CHECK_THROWS_AS(load_school(cfg), Error);
    cfg = mini();
    cfg.n_env_schools = 3;
    CHECK_THROWS_AS(load_school(cfg), Error);
  }

  TEST_CASE("the full School schema encodes 27 columns") {
    const SchoolSchema s = load_school_schema(kData / "school.schema.json");
    CHECK(s.expected_features == 27);
    CHECK(s.features.size() == 8);
  }
}
