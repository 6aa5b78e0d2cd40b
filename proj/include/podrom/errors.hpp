#pragma once

#include <stdexcept>
#include <string>

namespace podrom {

/// Precondition violated by the caller (shapes, ranges, missing data).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative method hit its cap. Carries the best estimate reached.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate = 0.0)
      : std::runtime_error(what), best_estimate_(best_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

/// Step size collapsed during time integration.
class StiffnessError : public std::runtime_error {
 public:
  StiffnessError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Right-hand side (or a derived quantity) produced a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be written or read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace podrom
