#pragma once

#include <stdexcept>
#include <string>

namespace vortexqkd {

/// Base class for every error raised by the library. Each subclass maps to a
/// process exit code used by the command-line tool.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 3; }
};

/// Bad user input or a violated precondition on parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// OAM index outside the truncation band.
class BandViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A state whose norm is too small to be normalized.
class DegenerateState : public Error {
 public:
  using Error::Error;
};

/// Inputs outside the regime where a linearized physical model holds.
class ModelValidityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace vortexqkd
