#pragma once

#include <stdexcept>
#include <string>

namespace gtt {

/// Bad input to an operation: out-of-range values, malformed files, missing
/// stimulus kinds. Maps to exit code 1 / HTTP 400.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A second response for an already-answered trial.
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation not allowed in the object's current state (closed session,
/// result requested before completion).
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gtt
