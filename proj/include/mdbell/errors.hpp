#pragma once

#include <stdexcept>
#include <string>

namespace mdbell {

/// Input rejected because it violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed serialized input; the message carries the JSON path of the problem.
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A well-posed computation that could not be completed (infeasible LP,
/// exhausted search budget).
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mdbell
