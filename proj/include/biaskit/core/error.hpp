#pragma once

#include <stdexcept>
#include <string>

namespace biaskit {

// Root of every error the library throws. The CLI maps subclasses onto
// process exit codes (ValidationError -> 2, StageDependencyError -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data, bad configuration, bad file contents.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidInput : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A quantity that has no value for the given data (empty denominators etc).
class Undefined : public Error {
 public:
  using Error::Error;
};

}  // namespace biaskit
