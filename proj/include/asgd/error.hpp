#pragma once

#include <stdexcept>
#include <string>

namespace asgd {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Mismatched vector/matrix dimensions between arguments.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite reals are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Bad configuration or argument values (schema violations, invalid enums,
// out-of-domain parameters).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A quantity was requested outside the range where the formula is valid.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Empirical risk has no attained minimum (iterates diverged past the cap).
class MinimumNotAttainedError : public Error {
 public:
  using Error::Error;
};

// Observation stream ended before the requested horizon.
class StreamExhaustedError : public Error {
 public:
  StreamExhaustedError(const std::string& msg, long step)
      : Error(msg), step_reached(step) {}
  long step_reached;
};

// Every probe of a self-concordance segment fell below the curvature guard.
class DegenerateSegmentError : public Error {
 public:
  using Error::Error;
};

// Iterative eigenvalue computation failed to reach its residual target.
class EigenSolveError : public Error {
 public:
  EigenSolveError(const std::string& msg, double res)
      : Error(msg), residual(res) {}
  double residual;
};

}  // namespace asgd
