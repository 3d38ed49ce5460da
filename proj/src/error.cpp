#include "gaussmeta/error.hpp"

#include <sstream>

namespace gaussmeta {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch:
      return "dimension_mismatch";
    case ErrorKind::InvalidArgument:
      return "invalid_argument";
    case ErrorKind::NotPositiveDefinite:
      return "not_positive_definite";
    case ErrorKind::Singular:
      return "singular";
    case ErrorKind::Parse:
      return "parse";
    case ErrorKind::Io:
      return "io";
    case ErrorKind::Numerical:
      return "numerical";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

std::string Error::machine_line() const {
  std::ostringstream os;
  os << "error kind=" << to_string(kind_);
  if (task_index) os << " task=" << *task_index;
  if (rank) os << " rank=" << *rank;
  if (line) os << " line=" << *line;
  if (iteration) os << " iteration=" << *iteration;
  os << " message=\"" << what() << "\"";
  return os.str();
}

}  // namespace gaussmeta
