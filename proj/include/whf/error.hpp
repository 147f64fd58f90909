#pragma once

#include <stdexcept>
#include <string>

namespace whf {

enum class ErrorKind {
  InvalidArgument,
  Positivity,       // a density lost strict positivity
  IterationLimit,   // an iterative solver hit its cap
  SolverDivergence, // implicit step fixed-point iteration diverged
  TimeStep,         // step size violates a stability guard
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

/// Exception type for every failure raised by the library. The kind lets
/// callers tell positivity loss apart from solver or configuration failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace whf
