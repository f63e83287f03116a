#pragma once

#include <stdexcept>
#include <string>

namespace evoflow {

/// Raised when an input violates a documented precondition or type
/// invariant (dimension mismatch, boundary point, non-SPD covariance,
/// bad configuration value). Maps to CLI exit status 3.
struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation fails mid-run on inputs that passed
/// validation (SPD violation during integration, boundary event,
/// non-finite state, factorization failure). Maps to CLI exit status 4.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace evoflow
