// error.hpp
// Exception types shared by all nmq modules.

#pragma once

#include <stdexcept>
#include <string>

namespace nmq {

/// Invalid input: bad ranges, malformed files, domain violations.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical failure: non-convergence, diverging optimisation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nmq
