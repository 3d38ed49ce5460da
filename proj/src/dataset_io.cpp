#include "gaussmeta/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gaussmeta/error.hpp"

namespace gaussmeta {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text) {
  std::size_t b = text.find_first_not_of(" \t\r");
  std::size_t e = text.find_last_not_of(" \t\r");
  if (b == std::string::npos) throw Error(ErrorKind::Parse, "empty numeric field");
  const char* first = text.data() + b;
  const char* last = text.data() + e + 1;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorKind::Parse, "not a finite number: '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw Error(ErrorKind::Parse, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  const Index d = ds.d();
  out << "task_id,row_id";
  for (Index j = 1; j <= d; ++j) out << ",x_" << j;
  out << ",y\n";
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const TaskData& t = ds[i];
    for (Index r = 0; r < t.m(); ++r) {
      out << i << ',' << r;
      for (Index j = 0; j < d; ++j) out << ',' << format_double(t.X()(r, j));
      out << ',' << format_double(t.Y()(r)) << '\n';
    }
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  write_dataset_csv(out, ds);
  if (!out) throw Error(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty dataset file").with_line(1);
  const auto header = split_csv_record(line);
  if (header.size() < 3 || header[0] != "task_id" || header[1] != "row_id" || header.back() != "y") {
    throw Error(ErrorKind::Parse, "header must be task_id,row_id,x_1..x_d,y").with_line(1);
  }
  const std::size_t d = header.size() - 3;

  std::map<std::string, std::size_t> slot;
  std::vector<std::vector<std::vector<double>>> rows;
  std::vector<std::vector<double>> ys;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      const auto fields = split_csv_record(line);
      if (fields.size() != header.size()) {
        throw Error(ErrorKind::Parse, "expected " + std::to_string(header.size()) + " fields, got " +
                                          std::to_string(fields.size()));
      }
      auto [it, fresh] = slot.try_emplace(fields[0], rows.size());
      if (fresh) {
        rows.emplace_back();
        ys.emplace_back();
      }
      std::vector<double> x(d);
      for (std::size_t j = 0; j < d; ++j) x[j] = parse_double(fields[2 + j]);
      rows[it->second].push_back(std::move(x));
      ys[it->second].push_back(parse_double(fields.back()));
    } catch (Error& e) {
      throw e.with_line(line_no);
    }
  }
  if (rows.empty()) throw Error(ErrorKind::Parse, "dataset has no rows").with_line(line_no);

  std::vector<TaskData> tasks;
  tasks.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index m = static_cast<Index>(rows[i].size());
    MatrixXd x(m, static_cast<Index>(d));
    VectorXd y(m);
    for (Index r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < d; ++j) x(r, static_cast<Index>(j)) = rows[i][r][j];
      y(r) = ys[i][r];
    }
    tasks.emplace_back(std::move(x), std::move(y));
  }
  return Dataset(std::move(tasks));
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return read_dataset_csv(in);
}

}  // namespace gaussmeta
