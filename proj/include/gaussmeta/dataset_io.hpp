#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gaussmeta/core.hpp"

namespace gaussmeta {

/// Dataset CSV layout: header `task_id,row_id,x_1,...,x_d,y`, one row per
/// sample, values printed with 17 significant digits so a round trip is
/// exact. Tasks are numbered 0..n-1 in dataset order.
void write_dataset_csv(std::ostream& out, const Dataset& ds);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);

/// Reads the layout above. Tasks keep the order of their first appearance;
/// rows within a task keep file order. Parse errors carry the line number.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Splits one CSV record; double quotes may wrap fields and "" escapes a quote.
std::vector<std::string> split_csv_record(const std::string& line);

/// Parses a whole string as a finite double or throws Error{Parse}.
double parse_double(const std::string& text);

/// printf("%.17g").
std::string format_double(double v);

}  // namespace gaussmeta
