#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace gaussmeta {

enum class ErrorKind {
  DimensionMismatch,
  InvalidArgument,
  NotPositiveDefinite,
  Singular,
  Parse,
  Io,
  Numerical,
};

const char* to_string(ErrorKind kind);

/// Library-wide exception. Carries a kind tag and, where it applies, the
/// index of the offending task, the numerical rank of a singular system, or
/// the 1-based line of a parse failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

  std::optional<std::size_t> task_index;
  std::optional<std::size_t> rank;
  std::optional<std::size_t> line;
  std::optional<std::size_t> iteration;

  Error& with_task(std::size_t i) {
    task_index = i;
    return *this;
  }
  Error& with_rank(std::size_t r) {
    rank = r;
    return *this;
  }
  Error& with_line(std::size_t l) {
    line = l;
    return *this;
  }

  /// One-line `key=value` rendering used by the CLI on failure.
  std::string machine_line() const;

 private:
  ErrorKind kind_;
};

}  // namespace gaussmeta
