#pragma once

#include <stdexcept>
#include <string>

namespace fracsphere {

// Invalid arguments or violated preconditions (dimension, ranges, malformed input).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The discretization cannot meet the requested accuracy.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solve stopped before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
      : std::runtime_error(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

}  // namespace fracsphere
